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

#include "sketchpair/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "sketchpair/checkpoint.hpp"
#include "sketchpair/config.hpp"
#include "sketchpair/dataset.hpp"
#include "sketchpair/decoder.hpp"
#include "sketchpair/encoder.hpp"
#include "sketchpair/errors.hpp"
#include "sketchpair/netspec.hpp"
#include "sketchpair/ops.hpp"
#include "sketchpair/pairgen.hpp"
#include "sketchpair/synthetic.hpp"

namespace fs = std::filesystem;

namespace sketchpair {
namespace {

constexpr const char* kEncoderCheckpoint = "encoder.ckpt";
constexpr const char* kDecoderCheckpoint = "decoder.ckpt";
constexpr const char* kEncoderLog = "encoder_log.jsonl";
constexpr const char* kDecoderLog = "decoder_log.jsonl";
constexpr const char* kConfigSnapshot = "config.txt";
constexpr std::int64_t kProgressEvery = 50;

// Flags shared by every subcommand: --config plus one flag per config key.
struct CommonFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App& app) {
    app.add_option("--config", config_file, "configuration file of `key = value` lines")->check(CLI::ExistingFile);
    for (const auto& key : config_keys()) {
      options[key.name] = app.add_option("--" + key.name, values[key.name], key.help);
    }
  }

  // defaults < config file < flags
  RunConfig resolve() const {
    RunConfig config;
    if (!config_file.empty()) config.apply_file(config_file);
    for (const auto& key : config_keys()) {
      if (options.at(key.name)->count() > 0) config.set(key.name, values.at(key.name));
    }
    return config;
  }
};

// Configuration a checkpoint was trained under.
RunConfig trained_config(const Checkpoint& ckpt) {
  RunConfig config;
  config.apply_text(ckpt.metadata.config, "checkpoint config");
  return config;
}

// Writes accumulated log lines when it goes out of scope, so that a run that
// aborts on a non-finite loss still leaves the steps it completed.
class LogFile {
 public:
  explicit LogFile(fs::path path) : path_(std::move(path)) {}
  ~LogFile() {
    try {
      atomic_write(path_, text_);
    } catch (...) {
    }
  }
  void append(const std::string& line) { text_ += line + "\n"; }

 private:
  fs::path path_;
  std::string text_;
};

void progress(std::ostream& err, const char* what, std::int64_t step, std::int64_t total, double loss, double lr) {
  if (step % kProgressEvery == 0 || step == total) {
    err << what << " step " << step << "/" << total << " total_generator=" << loss << " lr=" << lr << "\n";
  }
}

int make_corpus(const RunConfig& config, const fs::path& out_dir, int per_class, int classes, int size,
                std::ostream& out) {
  const fs::path manifest =
      make_synthetic_corpus(out_dir, per_class, classes, size > 0 ? size : config.resolved_image_size(), config.seed);
  out << "wrote " << per_class * classes << " images and outlines; manifest " << manifest.string() << "\n";
  return kExitOk;
}

int train_encoder(const RunConfig& config, const fs::path& image_dir, const fs::path& sketch_dir,
                  const fs::path& out_dir, std::ostream& out, std::ostream& err) {
  const auto images = list_images(image_dir);
  const auto sketches = list_images(sketch_dir);
  if (images.empty()) throw DataError("no images in " + image_dir.string());
  if (sketches.empty()) throw DataError("no sketches in " + sketch_dir.string());

  const EncoderTrainConfig tc = config.encoder();
  EncoderQuartet quartet = EncoderQuartet::build(config.resolved_encoder_generator(),
                                                 config.resolved_encoder_discriminator(), tc.image_size, config.seed,
                                                 config.network_options());
  EncoderTrainer trainer(quartet, tc);
  BatchSampler image_batches(images.size(), tc.batch_size, stream_key(config.seed, "encoder/images", 0));
  BatchSampler sketch_batches(sketches.size(), tc.batch_size, stream_key(config.seed, "encoder/sketches", 0));

  fs::create_directories(out_dir);
  atomic_write(out_dir / kConfigSnapshot, config.snapshot());
  {
    LogFile log(out_dir / kEncoderLog);
    for (std::int64_t s = 1; s <= tc.max_steps; ++s) {
      const Tensor x = load_batch(images, image_batches.next(), tc.image_size, config.encoder_color_mode());
      const Tensor y = load_batch(sketches, sketch_batches.next(), tc.image_size, ColorMode::Gray);
      const EncoderStepReport r = trainer.step(x, y);
      log.append(to_log_line(r));
      progress(err, "encoder", s, tc.max_steps, r.total_generator, r.current_lr);
    }
  }
  // Only the image-to-sketch generator is kept.
  const Network* nets[] = {&quartet.G};
  save_checkpoint(out_dir / kEncoderCheckpoint, nets, {trainer.steps_done(), trainer.lr(), config.seed,
                                                       config.snapshot()});
  out << "wrote " << (out_dir / kEncoderCheckpoint).string() << " after " << trainer.steps_done() << " steps\n";
  return kExitOk;
}

int generate(const RunConfig& config, const fs::path& encoder_path, const fs::path& corpus, const fs::path& out_dir,
             std::ostream& out, std::ostream& err) {
  Checkpoint ckpt = load_checkpoint(encoder_path);
  const RunConfig trained = trained_config(ckpt);
  Network& G = ckpt.network("G", trained.resolved_encoder_generator());
  PairgenOptions options;
  if (config.binarize_threshold >= 0) options.binarize_threshold = config.binarize_threshold;
  options.input_mode = trained.encoder_color_mode();
  options.log = [&err](const std::string& line) { err << line << "\n"; };
  const PairgenResult result = generate_pairs(G, corpus, out_dir, options);
  out << "wrote " << result.manifest.rows.size() << " pairs to " << result.manifest_path.string() << " ("
      << result.skipped << " skipped)\n";
  return kExitOk;
}

int train_decoder(const RunConfig& config, const fs::path& pairs, const fs::path& out_dir, std::ostream& out,
                  std::ostream& err) {
  const PairedDataset data = PairedDataset::from_manifest(pairs, Split::Train);
  const DecoderTrainConfig tc = config.decoder();
  if (data.num_classes > tc.num_classes) {
    throw UsageError("manifest has " + std::to_string(data.num_classes) + " classes but num_classes is " +
                     std::to_string(tc.num_classes));
  }
  DecoderPair pair = DecoderPair::build(config.resolved_decoder_generator(), config.resolved_decoder_discriminator(),
                                        tc, config.seed, config.network_options());
  DecoderTrainer trainer(pair, tc);
  BatchSampler batches(data.size(), tc.batch_size, stream_key(config.seed, "decoder/pairs", 0));

  fs::create_directories(out_dir);
  atomic_write(out_dir / kConfigSnapshot, config.snapshot());
  std::int64_t steps = 0;
  {
    LogFile log(out_dir / kDecoderLog);
    for (std::int64_t s = 1; s <= tc.max_steps; ++s) {
      const auto idx = batches.next();
      std::vector<int> labels;
      for (std::size_t i : idx) labels.push_back(data.labels[i]);
      const Tensor sketch = load_batch(data.sketches, idx, tc.image_size, ColorMode::Gray);
      const Tensor image = load_batch(data.images, idx, tc.image_size, ColorMode::Rgb);
      const DecoderStepReport r = trainer.step(sketch, image, labels);
      log.append(to_log_line(r));
      progress(err, "decoder", s, tc.max_steps, r.total_generator, r.current_lr);
      steps = s;
    }
  }
  const Network* nets[] = {&pair.G, &pair.D};
  save_checkpoint(out_dir / kDecoderCheckpoint, nets, {steps, trainer.lr(), config.seed, config.snapshot()});
  out << "wrote " << (out_dir / kDecoderCheckpoint).string() << " after " << steps << " steps\n";
  return kExitOk;
}

int translate_one(const fs::path& decoder_path, const fs::path& sketch_path, int label, const fs::path& out_path,
                  std::ostream& out) {
  Checkpoint ckpt = load_checkpoint(decoder_path);
  const RunConfig trained = trained_config(ckpt);
  const DecoderTrainConfig tc = trained.decoder();
  Network& G = ckpt.network("G_dec", trained.resolved_decoder_generator());
  // Validate the label before touching the sketch file.
  broadcast_label(label, tc.num_classes, 1, 1, tc.label_encoding);
  const Tensor sketch = load_image(sketch_path, G.spec().input_size, ColorMode::Gray);
  const Tensor image = translate(G, sketch, label, tc.num_classes, tc.label_encoding);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  write_png(tensor_to_image(image, ColorMode::Rgb), out_path);
  out << "wrote " << out_path.string() << "\n";
  return kExitOk;
}

int analyze(const fs::path& real_dir, const fs::path& fake_dir, const std::vector<int>& thresholds,
            const fs::path& out_path, std::ostream& out) {
  const auto real = list_images(real_dir);
  const auto fake = list_images(fake_dir);
  if (real.empty()) throw DataError("no images in " + real_dir.string());
  if (fake.empty()) throw DataError("no images in " + fake_dir.string());
  const std::string json = sketch_report(real, fake, thresholds).to_json() + "\n";
  if (!out_path.empty()) atomic_write(out_path, json);
  out << json;
  return kExitOk;
}

Shape parse_input_shape(const std::string& text) {
  Shape shape;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, 'x')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(part, &used);
      if (used != part.size() || v < 1) throw std::invalid_argument(part);
      shape.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("--input expects CxHxW with positive integers, got '" + text + "'");
    }
  }
  if (shape.size() != 3) throw UsageError("--input expects CxHxW, got '" + text + "'");
  return shape;
}

int inspect(const std::string& arch, const std::string& input, const std::string& role, std::ostream& out) {
  const Shape in = parse_input_shape(input);
  const auto tokens = parse_spec(arch);
  bool generator = role == "generator";
  if (role == "auto") {
    generator = false;
    for (const auto& t : tokens) generator = generator || t.kind != LayerKind::Down;
  }
  if (in[1] != in[2]) throw UsageError("--input must be square, got " + input);
  const int channels = static_cast<int>(in[0]), size = static_cast<int>(in[1]);
  const NetworkSpec spec = generator ? NetworkSpec::generator(arch, channels, size)
                                     : NetworkSpec::discriminator(arch, channels, size);
  const auto rows = infer_shapes(spec, in);
  out << (generator ? "generator" : "discriminator") << " " << spec.arch() << " input " << shape_str(in) << "\n";
  out << std::left << std::setw(4) << "#" << std::setw(10) << "layer" << std::setw(8) << "in_ch"
      << "output\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string output = rows[i].label == "head" ? "scalar score" : shape_str(rows[i].output);
    out << std::left << std::setw(4) << i + 1 << std::setw(10) << rows[i].label << std::setw(8)
        << rows[i].in_channels << output << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Image-to-sketch encoder and sketch-to-image decoder pipeline", "sketchpair"};
  app.require_subcommand(1);
  std::function<int(const RunConfig&)> command;

  auto add = [&](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    auto flags = std::make_shared<CommonFlags>();
    flags->attach(*sub);
    return std::pair{sub, flags};
  };

  std::string out_path;
  auto [corpus_cmd, corpus_flags] = add("make-synthetic-corpus", "draw a labeled corpus of shapes and outlines");
  int per_class = 32, classes = 2, size = 0;
  corpus_cmd->add_option("--out", out_path, "output directory")->required();
  corpus_cmd->add_option("--per-class", per_class, "images per class");
  corpus_cmd->add_option("--classes", classes, "number of classes");
  corpus_cmd->add_option("--size", size, "image size (default: the configured image_size)");

  std::string image_dir, sketch_dir;
  auto [encoder_cmd, encoder_flags] = add("train-encoder", "train the image-to-sketch cycle GAN");
  encoder_cmd->add_option("--images", image_dir, "directory of unpaired images")->required();
  encoder_cmd->add_option("--sketches", sketch_dir, "directory of unpaired sketches")->required();
  encoder_cmd->add_option("--out", out_path, "output directory")->required();

  std::string encoder_ckpt, corpus_manifest;
  auto [pairs_cmd, pairs_flags] = add("generate-pairs", "encode a labeled corpus into a paired dataset");
  pairs_cmd->add_option("--encoder", encoder_ckpt, "encoder checkpoint")->required();
  pairs_cmd->add_option("--manifest", corpus_manifest, "corpus manifest")->required();
  pairs_cmd->add_option("--out", out_path, "output directory")->required();

  std::string pairs_manifest;
  auto [decoder_cmd, decoder_flags] = add("train-decoder", "train the label-conditioned sketch-to-image decoder");
  decoder_cmd->add_option("--pairs", pairs_manifest, "paired manifest")->required();
  decoder_cmd->add_option("--out", out_path, "output directory")->required();

  std::string decoder_ckpt, sketch_file;
  int label = 0;
  auto [translate_cmd, translate_flags] = add("translate", "render an image from a sketch and a class label");
  translate_cmd->add_option("--decoder", decoder_ckpt, "decoder checkpoint")->required();
  translate_cmd->add_option("--sketch", sketch_file, "sketch image")->required();
  translate_cmd->add_option("--label", label, "class label id")->required();
  translate_cmd->add_option("--out", out_path, "output PNG")->required();

  std::string real_dir, fake_dir;
  std::vector<int> thresholds{64, 128, 192};
  auto [analyze_cmd, analyze_flags] = add("analyze-sketches", "compare pixel statistics of real and fake sketches");
  analyze_cmd->add_option("--real", real_dir, "directory of real sketches")->required();
  analyze_cmd->add_option("--fake", fake_dir, "directory of generated sketches")->required();
  analyze_cmd->add_option("--thresholds", thresholds, "thresholds of the black-fraction sweep")->delimiter(',');
  analyze_cmd->add_option("--out", out_path, "also write the report to this file");

  std::string arch, input = "3x256x256", role = "auto";
  auto [inspect_cmd, inspect_flags] = add("inspect-spec", "print the layer shapes of an architecture string");
  inspect_cmd->add_option("arch", arch, "architecture string, e.g. D64-D128-D256-D512")->required();
  inspect_cmd->add_option("--input", input, "input shape CxHxW");
  inspect_cmd->add_option("--role", role, "generator, discriminator or auto")
      ->check(CLI::IsMember({"auto", "generator", "discriminator"}));
  inspect_cmd->add_option("--out", out_path, "unused; accepted for uniformity");

  auto [show_cmd, show_flags] = add("show-config", "print the resolved configuration as `key = value` lines");

  const std::pair<CLI::App*, std::shared_ptr<CommonFlags>> subs[] = {
      {corpus_cmd, corpus_flags},   {encoder_cmd, encoder_flags},     {pairs_cmd, pairs_flags},
      {decoder_cmd, decoder_flags}, {translate_cmd, translate_flags}, {analyze_cmd, analyze_flags},
      {inspect_cmd, inspect_flags}, {show_cmd, show_flags}};

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (const auto& [sub, flags] : subs) {
      if (!sub->parsed()) continue;
      const RunConfig config = flags->resolve();
      if (sub == corpus_cmd) return make_corpus(config, out_path, per_class, classes, size, out);
      if (sub == encoder_cmd) return train_encoder(config, image_dir, sketch_dir, out_path, out, err);
      if (sub == pairs_cmd) return generate(config, encoder_ckpt, corpus_manifest, out_path, out, err);
      if (sub == decoder_cmd) return train_decoder(config, pairs_manifest, out_path, out, err);
      if (sub == translate_cmd) return translate_one(decoder_ckpt, sketch_file, label, out_path, out);
      if (sub == analyze_cmd) return analyze(real_dir, fake_dir, thresholds, out_path, out);
      if (sub == inspect_cmd) return inspect(arch, input, role, out);
      if (sub == show_cmd) {
        out << config.snapshot();
        return kExitOk;
      }
    }
    return kExitUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace sketchpair
