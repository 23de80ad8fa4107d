/*
 * Copyright 2026 The sketchpair Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sketchpair/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sketchpair/errors.hpp"
#include "sketchpair/netspec.hpp"

namespace sketchpair {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("invalid value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

template <typename T>
std::string format_number(T value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

struct Entry {
  ConfigKey key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

template <typename T>
Entry number(std::string name, T RunConfig::*field, std::string help) {
  return {{name, std::move(help)},
          [field](const RunConfig& c) { return format_number(c.*field); },
          [field, name](RunConfig& c, std::string_view v) { c.*field = parse_number<T>(name, v); }};
}

Entry choice(std::string name, std::string RunConfig::*field, std::vector<std::string> allowed, std::string help) {
  return {{name, std::move(help)},
          [field](const RunConfig& c) { return c.*field; },
          [field, name, allowed](RunConfig& c, std::string_view v) {
            for (const auto& a : allowed) {
              if (v == a) {
                c.*field = a;
                return;
              }
            }
            std::string options;
            for (const auto& a : allowed) options += (options.empty() ? "" : "|") + a;
            throw UsageError("invalid value '" + std::string(v) + "' for " + name + " (expected " + options + ")");
          }};
}

// Architecture keys validate their notation on assignment and snapshot the
// preset-resolved string.
Entry arch(std::string name, std::string RunConfig::*field, std::string (RunConfig::*resolved)() const,
           std::string help) {
  return {{name, std::move(help)},
          [resolved](const RunConfig& c) { return (c.*resolved)(); },
          [name, field](RunConfig& c, std::string_view v) {
            try {
              c.*field = render_spec(parse_spec(v));
            } catch (const ParseError& e) {
              throw UsageError(name + ": " + e.what());
            }
          }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      choice("preset", &RunConfig::preset, {"full", "small"},
             "architecture/size preset: full (256x256) or small (32x32)"),
      number("seed", &RunConfig::seed, "seed of every random stream"),
      arch("encoder_generator", &RunConfig::encoder_generator, &RunConfig::resolved_encoder_generator,
           "encoder generator layers"),
      arch("encoder_discriminator", &RunConfig::encoder_discriminator, &RunConfig::resolved_encoder_discriminator,
           "encoder discriminator layers"),
      arch("decoder_generator", &RunConfig::decoder_generator, &RunConfig::resolved_decoder_generator,
           "decoder generator layers"),
      arch("decoder_discriminator", &RunConfig::decoder_discriminator, &RunConfig::resolved_decoder_discriminator,
           "decoder discriminator layers"),
      {{"image_size", "training resolution (square)"},
       [](const RunConfig& c) { return std::to_string(c.resolved_image_size()); },
       [](RunConfig& c, std::string_view v) {
         c.image_size = parse_number<int>("image_size", v);
         if (c.image_size < 1) throw UsageError("image_size must be positive");
       }},
      choice("encoder_color", &RunConfig::encoder_color, {"gray", "rgb"}, "encoder input images: gray or rgb"),
      number("encoder_batch_size", &RunConfig::encoder_batch_size, "encoder batch size"),
      number("lambda_cyc", &RunConfig::lambda_cyc, "cycle-consistency weight"),
      number("encoder_lr", &RunConfig::encoder_lr, "encoder initial learning rate"),
      number("encoder_steps", &RunConfig::encoder_steps, "encoder training steps"),
      choice("gan_loss", &RunConfig::gan_loss, {"nonsaturating", "literal"}, "encoder generator adversarial form"),
      number("decoder_batch_size", &RunConfig::decoder_batch_size, "decoder batch size"),
      number("lambda_l1", &RunConfig::lambda_l1, "decoder L1 weight"),
      number("decoder_lr", &RunConfig::decoder_lr, "decoder initial learning rate"),
      number("decoder_steps", &RunConfig::decoder_steps, "decoder training steps"),
      number("num_classes", &RunConfig::num_classes, "class count used for label conditioning"),
      choice("lsgan_targets", &RunConfig::lsgan_targets, {"standard", "literal"},
             "least-squares targets: standard (real 1, fake 0) or literal (real 0, fake 1)"),
      choice("label_encoding", &RunConfig::label_encoding, {"scalar", "onehot"}, "label planes: scalar or onehot"),
      choice("disc_input", &RunConfig::disc_input, {"sketch_label_image", "label_image"},
             "decoder discriminator input"),
      number("adam_beta1", &RunConfig::adam_beta1, "Adam first-moment decay"),
      number("adam_beta2", &RunConfig::adam_beta2, "Adam second-moment decay"),
      number("adam_eps", &RunConfig::adam_eps, "Adam epsilon"),
      number("lr_decay_factor", &RunConfig::lr_decay_factor, "divisor applied on a plateau"),
      number("plateau_window", &RunConfig::plateau_window, "steps per averaging window"),
      number("plateau_patience", &RunConfig::plateau_patience, "stale windows before a decay"),
      number("plateau_threshold", &RunConfig::plateau_threshold, "relative improvement that resets patience"),
      number("lr_floor", &RunConfig::lr_floor, "lowest learning rate"),
      number("dropout", &RunConfig::dropout, "generator dropout rate"),
      number("dropout_layers", &RunConfig::dropout_layers, "innermost up layers with dropout"),
      number("alpha", &RunConfig::alpha, "generator leaky-ReLU slope"),
      number("discriminator_alpha", &RunConfig::discriminator_alpha, "discriminator leaky-ReLU slope"),
      number("init_std", &RunConfig::init_std, "standard deviation of kernel initialization"),
      number("binarize_threshold", &RunConfig::binarize_threshold,
             "threshold applied to generated sketches; negative disables"),
      number("split_train", &RunConfig::split_train, "fraction of rows assigned to train"),
      number("split_val", &RunConfig::split_val, "fraction of rows assigned to val"),
  };
  return table;
}

const Entry& entry(std::string_view key) {
  for (const auto& e : entries()) {
    if (e.key.name == key) return e;
  }
  throw UsageError("unknown configuration key '" + std::string(key) + "'");
}

bool small(const RunConfig& c) { return c.preset == "small"; }

std::string pick(const std::string& explicit_value, std::string_view full, std::string_view reduced, bool use_small) {
  if (!explicit_value.empty()) return explicit_value;
  return std::string(use_small ? reduced : full);
}

AdamOptions adam_options(const RunConfig& c, double lr) { return {lr, c.adam_beta1, c.adam_beta2, c.adam_eps}; }

}  // namespace

std::string RunConfig::resolved_encoder_generator() const {
  return pick(encoder_generator, presets::kEncoderGenerator, presets::kSmallEncoderGenerator, small(*this));
}
std::string RunConfig::resolved_encoder_discriminator() const {
  return pick(encoder_discriminator, presets::kEncoderDiscriminator, presets::kSmallEncoderDiscriminator,
              small(*this));
}
std::string RunConfig::resolved_decoder_generator() const {
  return pick(decoder_generator, presets::kDecoderGenerator, presets::kSmallDecoderGenerator, small(*this));
}
std::string RunConfig::resolved_decoder_discriminator() const {
  return pick(decoder_discriminator, presets::kDecoderDiscriminator, presets::kSmallDecoderDiscriminator,
              small(*this));
}
int RunConfig::resolved_image_size() const {
  if (image_size > 0) return image_size;
  return small(*this) ? presets::kSmallImageSize : presets::kImageSize;
}

EncoderTrainConfig RunConfig::encoder() const {
  EncoderTrainConfig e;
  e.batch_size = encoder_batch_size;
  e.lambda_cyc = lambda_cyc;
  e.lr = encoder_lr;
  e.lr_decay_factor = lr_decay_factor;
  e.plateau_window = plateau_window;
  e.plateau_patience = plateau_patience;
  e.plateau_threshold = plateau_threshold;
  e.lr_floor = lr_floor;
  e.max_steps = encoder_steps;
  e.seed = seed;
  e.image_size = resolved_image_size();
  e.gan_loss = gan_loss == "literal" ? GanLossForm::Literal : GanLossForm::NonSaturating;
  e.adam = adam_options(*this, encoder_lr);
  return e;
}

DecoderTrainConfig RunConfig::decoder() const {
  DecoderTrainConfig d;
  d.batch_size = decoder_batch_size;
  d.lambda_l1 = lambda_l1;
  d.lr = decoder_lr;
  d.num_classes = num_classes;
  d.seed = seed;
  d.image_size = resolved_image_size();
  d.max_steps = decoder_steps;
  d.targets = lsgan_targets == "literal" ? LsganTargets::Literal : LsganTargets::Standard;
  d.label_encoding = label_encoding == "onehot" ? LabelEncoding::OneHot : LabelEncoding::Scalar;
  d.disc_input = disc_input == "label_image" ? DiscriminatorInput::LabelImage : DiscriminatorInput::SketchLabelImage;
  d.lr_decay_factor = lr_decay_factor;
  d.plateau_window = plateau_window;
  d.plateau_patience = plateau_patience;
  d.plateau_threshold = plateau_threshold;
  d.lr_floor = lr_floor;
  d.adam = adam_options(*this, decoder_lr);
  return d;
}

NetworkOptions RunConfig::network_options() const {
  NetworkOptions o;
  o.generator_alpha = alpha;
  o.discriminator_alpha = discriminator_alpha;
  o.dropout_rate = dropout;
  o.dropout_layers = dropout_layers;
  o.init_std = init_std;
  return o;
}

ColorMode RunConfig::encoder_color_mode() const { return encoder_color == "rgb" ? ColorMode::Rgb : ColorMode::Gray; }

SplitFractions RunConfig::split() const { return {split_train, split_val}; }

void RunConfig::set(std::string_view key, std::string_view value) { entry(key).set(*this, trim(value)); }

std::string RunConfig::get(std::string_view key) const { return entry(key).get(*this); }

void RunConfig::apply_text(std::string_view text, std::string_view origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(number) + ": ";
    if (eq == std::string_view::npos) throw UsageError(where + "expected 'key = value'");
    try {
      set(trim(body.substr(0, eq)), body.substr(eq + 1));
    } catch (const Error& e) {
      throw UsageError(where + e.what());
    }
  }
}

void RunConfig::apply_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  apply_text(text.str(), path.string());
}

std::string RunConfig::snapshot() const {
  std::string out;
  for (const auto& e : entries()) out += e.key.name + " = " + e.get(*this) + "\n";
  return out;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& e : entries()) out.push_back(e.key);
    return out;
  }();
  return keys;
}

}  // namespace sketchpair
