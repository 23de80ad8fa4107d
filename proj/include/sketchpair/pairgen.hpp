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

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sketchpair/image_io.hpp"
#include "sketchpair/manifest.hpp"
#include "sketchpair/network.hpp"

namespace sketchpair {

/// pixel >= threshold -> 255, else 0.
Image8 binarize(const Image8& image, int threshold);

/// Exact counts of 8-bit gray values.
struct PixelHistogram {
  std::array<std::int64_t, 256> counts{};
  std::int64_t total = 0;

  void add(const Image8& gray);
  PixelHistogram& operator+=(const PixelHistogram& other);
  bool operator==(const PixelHistogram&) const = default;
};

/// Histogram over the gray channel of every listed image (color images are
/// converted to gray first). Throws DataError naming an undecodable file.
PixelHistogram pixel_histogram(std::span<const std::filesystem::path> paths);

/// (counts[0] + counts[255]) / total. Throws DataError on an empty histogram.
double binary_mass_fraction(const PixelHistogram& histogram);

/// Fraction of pixels strictly below `threshold`, i.e. those binarize() maps to black.
double black_fraction(const PixelHistogram& histogram, int threshold);

struct ThresholdRow {
  int threshold = 0;
  double real_black = 0.0;
  double fake_black = 0.0;
};

struct SketchReport {
  PixelHistogram real;
  PixelHistogram fake;
  double real_binary_fraction = 0.0;
  double fake_binary_fraction = 0.0;
  double difference = 0.0;  ///< real minus fake binary fraction
  std::vector<ThresholdRow> sweep;

  std::string to_json() const;
};

/// Compares the pixel statistics of real and generated sketches. The
/// threshold sweep is descriptive only; no threshold is applied to the inputs.
SketchReport sketch_report(std::span<const std::filesystem::path> real_paths,
                           std::span<const std::filesystem::path> fake_paths, std::span<const int> thresholds = {});

struct PairgenOptions {
  std::optional<int> binarize_threshold;
  ColorMode input_mode = ColorMode::Gray;
  /// Receives one line per skipped corpus row.
  std::function<void(const std::string&)> log;
};

struct PairgenResult {
  std::filesystem::path manifest_path;
  Manifest manifest;
  std::size_t skipped = 0;
};

/// Encodes every corpus image with G, writes 8-bit gray sketches to
/// out_dir/sketches/ and a paired manifest (out_dir/pairs.tsv) whose image
/// paths point back at the corpus. Rows that cannot be decoded are skipped and
/// logged; a run with no successful rows throws DataError.
PairgenResult generate_pairs(Network& G, const std::filesystem::path& corpus_manifest,
                             const std::filesystem::path& out_dir, const PairgenOptions& options = {});

}  // namespace sketchpair
