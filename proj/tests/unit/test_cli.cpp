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

#include <doctest.h>

#include <json.hpp>

#include <map>
#include <sstream>

#include "sketchpair/checkpoint.hpp"
#include "sketchpair/cli.hpp"
#include "sketchpair/config.hpp"
#include "sketchpair/decoder.hpp"
#include "sketchpair/image_io.hpp"
#include "sketchpair/manifest.hpp"
#include "support/temp_dir.hpp"

using namespace sketchpair;
using namespace sketchpair::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sketchpair");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::map<std::string, std::string> parse_snapshot(const std::string& text) {
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) values[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return values;
}

/// Two non-default values per key: one for the config file, one for the flag.
const std::map<std::string, std::pair<std::string, std::string>>& override_values() {
  static const std::map<std::string, std::pair<std::string, std::string>> v = {
      {"preset", {"small", "full"}},
      {"seed", {"11", "12"}},
      {"encoder_generator", {"D8-D8-U8-U3", "D16-U3"}},
      {"encoder_discriminator", {"D8-D16", "D4"}},
      {"decoder_generator", {"D8-R8-U3", "D16-U3"}},
      {"decoder_discriminator", {"D8-D16", "D4"}},
      {"image_size", {"64", "128"}},
      {"encoder_color", {"rgb", "gray"}},
      {"encoder_batch_size", {"2", "8"}},
      {"lambda_cyc", {"5", "20"}},
      {"encoder_lr", {"0.001", "2e-4"}},
      {"encoder_steps", {"500", "700"}},
      {"gan_loss", {"literal", "nonsaturating"}},
      {"decoder_batch_size", {"2", "8"}},
      {"lambda_l1", {"50", "10"}},
      {"decoder_lr", {"2e-4", "3e-4"}},
      {"decoder_steps", {"300", "400"}},
      {"num_classes", {"2", "3"}},
      {"lsgan_targets", {"literal", "standard"}},
      {"label_encoding", {"onehot", "scalar"}},
      {"disc_input", {"label_image", "sketch_label_image"}},
      {"adam_beta1", {"0.9", "0.8"}},
      {"adam_beta2", {"0.99", "0.98"}},
      {"adam_eps", {"1e-07", "1e-06"}},
      {"lr_decay_factor", {"2", "3"}},
      {"plateau_window", {"10", "20"}},
      {"plateau_patience", {"2", "3"}},
      {"plateau_threshold", {"0.05", "0.1"}},
      {"lr_floor", {"1e-09", "1e-10"}},
      {"dropout", {"0.25", "0.1"}},
      {"dropout_layers", {"1", "2"}},
      {"alpha", {"0.1", "0.3"}},
      {"discriminator_alpha", {"0.2", "0.1"}},
      {"init_std", {"0.01", "0.05"}},
      {"binarize_threshold", {"128", "200"}},
      {"split_train", {"0.8", "0.7"}},
      {"split_val", {"0.1", "0.15"}},
  };
  return v;
}

/// Canonical text of `value` for `key`, as the configuration prints it.
std::string canonical(const std::string& key, const std::string& value) {
  RunConfig c;
  c.set(key, value);
  return c.get(key);
}

}  // namespace

TEST_CASE("every key obeys defaults < config file < flags") {
  const auto& table = override_values();
  REQUIRE(table.size() == config_keys().size());
  TempDir dir("cli_config");
  const auto defaults = parse_snapshot(cli({"show-config"}).out);
  for (const auto& key : config_keys()) {
    CAPTURE(key.name);
    REQUIRE(table.count(key.name) == 1);
    const auto& [file_value, flag_value] = table.at(key.name);
    const std::string file_text = canonical(key.name, file_value);
    const std::string flag_text = canonical(key.name, flag_value);
    CHECK(file_text != defaults.at(key.name));
    CHECK(flag_text != file_text);

    const fs::path cfg = dir / (key.name + ".cfg");
    write_file(cfg, "# override\n" + key.name + " = " + file_value + "\n");
    const Run from_file = cli({"show-config", "--config", cfg.string()});
    REQUIRE(from_file.code == kExitOk);
    CHECK(parse_snapshot(from_file.out).at(key.name) == file_text);

    const Run from_flag = cli({"show-config", "--config", cfg.string(), "--" + key.name, flag_value});
    REQUIRE(from_flag.code == kExitOk);
    CHECK(parse_snapshot(from_flag.out).at(key.name) == flag_text);

    // Other keys keep their defaults unless they derive from a preset.
    for (const auto& [k, v] : parse_snapshot(from_flag.out)) {
      if (k == key.name || key.name == "preset") continue;
      CHECK(v == defaults.at(k));
    }
  }
}

TEST_CASE("configuration errors are usage errors") {
  TempDir dir("cli_config");
  write_file(dir / "bad.cfg", "lambda_cyc = 1\nwhat = 2\n");
  const Run r = cli({"show-config", "--config", (dir / "bad.cfg").string()});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("bad.cfg:2") != std::string::npos);
  CHECK(cli({"show-config", "--lambda_cyc", "x"}).code == kExitUsage);
  CHECK(cli({"show-config", "--no_such_flag", "1"}).code == kExitUsage);
  CHECK(cli({"show-config", "--config", (dir / "absent.cfg").string()}).code == kExitUsage);
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);
  CHECK(cli({"translate", "--help"}).code == kExitOk);
}

TEST_CASE("inspect-spec prints one row per layer and the score head") {
  const Run r = cli({"inspect-spec", "D64-D128-D256-D512", "--input", "4x256x256"});
  REQUIRE(r.code == kExitOk);
  std::istringstream in(r.out);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() == 7);  // title, column header, four layers, head
  CHECK(lines[0].find("discriminator") != std::string::npos);
  CHECK(lines[2].find("D64") != std::string::npos);
  CHECK(lines[2].find("[64x128x128]") != std::string::npos);
  CHECK(lines[5].find("D512") != std::string::npos);
  CHECK(lines[5].find("[512x16x16]") != std::string::npos);
  CHECK(lines[6].find("scalar score") != std::string::npos);

  const Run g = cli({"inspect-spec", std::string(presets::kEncoderGenerator)});
  REQUIRE(g.code == kExitOk);
  CHECK(g.out.find("generator") == 0);
  CHECK(g.out.find("[3x256x256]") != std::string::npos);

  CHECK(cli({"inspect-spec", "D64-X128"}).code == kExitUsage);
  CHECK(cli({"inspect-spec", "D64", "--input", "3x1x1", "--role", "discriminator"}).code == kExitUsage);
  CHECK(cli({"inspect-spec", "D64", "--input", "banana"}).code == kExitUsage);
}

TEST_CASE("translate validates the label against the trained class count") {
  TempDir dir("cli_translate");
  RunConfig cfg;
  cfg.set("decoder_generator", "D4-D8-U4-U3");
  cfg.set("decoder_discriminator", "D4-D8");
  cfg.set("image_size", "8");
  auto pair = DecoderPair::build(cfg.resolved_decoder_generator(), cfg.resolved_decoder_discriminator(), cfg.decoder(),
                                 1, cfg.network_options());
  const Network* nets[] = {&pair.G, &pair.D};
  CheckpointMetadata meta;
  meta.config = cfg.snapshot();
  save_checkpoint(dir / "decoder.ckpt", nets, meta);
  write_png(Image8(8, 8, 1, 255), dir / "sketch.png");

  const Run bad = cli({"translate", "--decoder", (dir / "decoder.ckpt").string(), "--sketch",
                       (dir / "sketch.png").string(), "--label", "300", "--out", (dir / "x.png").string()});
  CHECK(bad.code == kExitUsage);
  CHECK(bad.err.find("300") != std::string::npos);
  CHECK(bad.err.find("256") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "x.png"));

  const Run ok = cli({"translate", "--decoder", (dir / "decoder.ckpt").string(), "--sketch",
                      (dir / "sketch.png").string(), "--label", "255", "--out", (dir / "y.png").string()});
  REQUIRE(ok.code == kExitOk);
  const Image8 img = read_image(dir / "y.png");
  CHECK(img.width == 8);
  CHECK(img.channels == 3);

  const Run missing = cli({"translate", "--decoder", (dir / "absent.ckpt").string(), "--sketch",
                           (dir / "sketch.png").string(), "--label", "1", "--out", (dir / "z.png").string()});
  CHECK(missing.code == kExitData);
}

TEST_CASE("data errors and numeric aborts map to their exit codes") {
  TempDir dir("cli_codes");
  REQUIRE(cli({"make-synthetic-corpus", "--out", (dir / "c").string(), "--per-class", "4", "--classes", "2", "--size",
               "8"})
              .code == kExitOk);
  CHECK(read_manifest(dir / "c" / "manifest.tsv").rows.size() == 8);

  const std::vector<std::string> tiny = {"--encoder_generator", "D4-D8-U4-U3", "--encoder_discriminator", "D4-D8",
                                         "--image_size", "8"};
  auto with = [&](std::vector<std::string> args) {
    args.insert(args.end(), tiny.begin(), tiny.end());
    return cli(args);
  };
  const Run nan = with({"train-encoder", "--images", (dir / "c" / "images").string(), "--sketches",
                        (dir / "c" / "outlines").string(), "--out", (dir / "e").string(), "--encoder_lr", "1e30",
                        "--encoder_steps", "20"});
  CHECK(nan.code == kExitNumeric);
  CHECK(nan.err.find("non-finite") != std::string::npos);

  const Run empty = with({"train-encoder", "--images", (dir / "nowhere").string(), "--sketches",
                          (dir / "c" / "outlines").string(), "--out", (dir / "e2").string(), "--encoder_steps", "1"});
  CHECK(empty.code == kExitData);

  CHECK(cli({"generate-pairs", "--encoder", (dir / "absent.ckpt").string(), "--manifest",
             (dir / "c" / "manifest.tsv").string(), "--out", (dir / "p").string()})
            .code == kExitData);
  CHECK(cli({"train-decoder", "--pairs", (dir / "absent.tsv").string(), "--out", (dir / "d").string()}).code ==
        kExitData);
  CHECK(cli({"analyze-sketches", "--real", (dir / "nowhere").string(), "--fake", (dir / "c" / "outlines").string()})
            .code == kExitData);
}

TEST_CASE("analyze-sketches prints a JSON report") {
  TempDir dir("cli_analyze");
  REQUIRE(cli({"make-synthetic-corpus", "--out", (dir / "c").string(), "--per-class", "3", "--classes", "2", "--size",
               "16"})
              .code == kExitOk);
  const Run r = cli({"analyze-sketches", "--real", (dir / "c" / "outlines").string(), "--fake",
                     (dir / "c" / "images").string(), "--thresholds", "64,128", "--out", (dir / "r.json").string()});
  REQUIRE(r.code == kExitOk);
  const auto report = nlohmann::json::parse(r.out);
  CHECK(report.at("real_binary_fraction").get<double>() == 1.0);
  CHECK(report.at("sweep").size() == 2);
  CHECK(nlohmann::json::parse(read_file(dir / "r.json")) == report);
}
