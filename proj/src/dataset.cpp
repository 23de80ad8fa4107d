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

#include "sketchpair/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "sketchpair/errors.hpp"
#include "sketchpair/ops.hpp"

namespace fs = std::filesystem;

namespace sketchpair {

BatchSampler::BatchSampler(std::size_t count, int batch_size, std::uint64_t seed)
    : count_(count), batch_(static_cast<std::size_t>(batch_size)), seed_(seed) {
  if (count == 0) throw DataError("cannot sample batches from an empty dataset");
  if (batch_size < 1) throw UsageError("batch size must be positive, got " + std::to_string(batch_size));
  order_.resize(count_);
  reshuffle();
}

void BatchSampler::reshuffle() {
  ++epoch_;
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::mt19937_64 rng(stream_key(seed_, "sampler", epoch_));
  std::shuffle(order_.begin(), order_.end(), rng);
  cursor_ = 0;
}

std::vector<std::size_t> BatchSampler::next() {
  // The tail of an epoch that cannot fill a whole batch is dropped; datasets
  // smaller than one batch fill it from consecutive epochs instead.
  if (count_ >= batch_ && count_ - cursor_ < batch_) reshuffle();
  std::vector<std::size_t> out;
  out.reserve(batch_);
  while (out.size() < batch_) {
    if (cursor_ == count_) reshuffle();
    out.push_back(order_[cursor_++]);
  }
  return out;
}

Tensor load_batch(std::span<const fs::path> paths, std::span<const std::size_t> indices, int size, ColorMode mode) {
  std::vector<Tensor> items;
  items.reserve(indices.size());
  for (std::size_t i : indices) items.push_back(load_image(paths[i], size, mode));
  return stack(items);
}

PairedDataset PairedDataset::from_manifest(const fs::path& manifest_path, Split split) {
  const Manifest m = read_manifest(manifest_path);
  PairedDataset out;
  out.num_classes = static_cast<int>(m.classes.size());
  for (const auto& row : m.rows) {
    if (row.split != split) continue;
    out.sketches.push_back(resolve_path(manifest_path, row.sketch_path));
    out.images.push_back(resolve_path(manifest_path, row.image_path));
    out.labels.push_back(row.label_id);
  }
  if (out.images.empty()) {
    throw DataError("manifest " + manifest_path.string() + " has no " + split_name(split) + " rows");
  }
  return out;
}

}  // namespace sketchpair
