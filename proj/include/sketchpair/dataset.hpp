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
#include <span>
#include <vector>

#include "sketchpair/image_io.hpp"
#include "sketchpair/manifest.hpp"

namespace sketchpair {

/// Seeded epoch-wise shuffling of indices [0, count). Every epoch is a fresh
/// permutation.
class BatchSampler {
 public:
  BatchSampler(std::size_t count, int batch_size, std::uint64_t seed);

  std::vector<std::size_t> next();
  std::int64_t epoch() const { return epoch_; }

 private:
  void reshuffle();

  std::size_t count_;
  std::size_t batch_;
  std::uint64_t seed_;
  std::int64_t epoch_ = -1;
  std::size_t cursor_ = 0;
  std::vector<std::size_t> order_;
};

/// Images decoded on demand, resized to `size` and stacked into (B, 3, S, S).
Tensor load_batch(std::span<const std::filesystem::path> paths, std::span<const std::size_t> indices, int size,
                  ColorMode mode);

/// A paired dataset read from a manifest: sketches (gray) and images (RGB).
struct PairedDataset {
  std::vector<std::filesystem::path> sketches;
  std::vector<std::filesystem::path> images;
  std::vector<int> labels;
  int num_classes = 0;

  static PairedDataset from_manifest(const std::filesystem::path& manifest, Split split);
  std::size_t size() const { return images.size(); }
};

}  // namespace sketchpair
