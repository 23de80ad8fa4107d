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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "sketchpair/decoder.hpp"
#include "sketchpair/encoder.hpp"
#include "sketchpair/image_io.hpp"
#include "sketchpair/manifest.hpp"
#include "sketchpair/network.hpp"

namespace sketchpair {

/// Every tunable setting of a run. Defaults are the full-scale training values; the
/// architecture strings and image size follow `preset` unless set explicitly.
struct RunConfig {
  std::string preset = "full";  ///< "full" (256x256) or "small" (32x32)
  std::uint64_t seed = 0;

  std::string encoder_generator;  ///< empty: taken from the preset
  std::string encoder_discriminator;
  std::string decoder_generator;
  std::string decoder_discriminator;
  int image_size = 0;  ///< 0: taken from the preset
  std::string encoder_color = "gray";

  int encoder_batch_size = 4;
  double lambda_cyc = 10.0;
  double encoder_lr = 1e-4;
  std::int64_t encoder_steps = 100000;
  std::string gan_loss = "nonsaturating";

  int decoder_batch_size = 4;
  double lambda_l1 = 100.0;
  double decoder_lr = 1e-6;
  std::int64_t decoder_steps = 100000;
  int num_classes = 256;
  std::string lsgan_targets = "standard";
  std::string label_encoding = "scalar";
  std::string disc_input = "sketch_label_image";

  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double lr_decay_factor = 10.0;
  int plateau_window = 50;
  int plateau_patience = 5;
  double plateau_threshold = 0.01;
  double lr_floor = 1e-8;

  double dropout = 0.5;
  int dropout_layers = 3;
  double alpha = 0.2;  ///< generator leaky-ReLU slope
  double discriminator_alpha = 0.0;
  double init_std = 0.02;

  int binarize_threshold = -1;  ///< < 0: sketches are written unthresholded
  double split_train = 0.90;
  double split_val = 0.05;

  /// Architecture strings and image size after preset resolution.
  std::string resolved_encoder_generator() const;
  std::string resolved_encoder_discriminator() const;
  std::string resolved_decoder_generator() const;
  std::string resolved_decoder_discriminator() const;
  int resolved_image_size() const;

  EncoderTrainConfig encoder() const;
  DecoderTrainConfig decoder() const;
  NetworkOptions network_options() const;
  ColorMode encoder_color_mode() const;
  SplitFractions split() const;

  /// Sets one key from its text form; throws UsageError for unknown keys or
  /// malformed values.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;

  /// Applies `key = value` lines; `#` starts a comment.
  void apply_text(std::string_view text, std::string_view origin = "config");
  void apply_file(const std::filesystem::path& path);

  /// Every key with its resolved value, one `key = value` line each, in
  /// schema order. Reading the snapshot back yields a configuration with the
  /// same resolved values.
  std::string snapshot() const;

  bool operator==(const RunConfig&) const = default;
};

struct ConfigKey {
  std::string name;
  std::string help;
};

/// The schema: every accepted key in snapshot order.
const std::vector<ConfigKey>& config_keys();

}  // namespace sketchpair
