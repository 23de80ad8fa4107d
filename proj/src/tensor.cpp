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

#include "sketchpair/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "sketchpair/errors.hpp"

namespace sketchpair {

std::int64_t numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(std::move(shape)) {
  for (auto d : shape_) {
    if (d < 0) throw ShapeError("negative dimension in " + shape_str(shape_));
  }
  data_.assign(static_cast<std::size_t>(numel(shape_)), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> values) : shape_(std::move(shape)), data_(std::move(values)) {
  if (static_cast<std::int64_t>(data_.size()) != numel(shape_)) {
    throw ShapeError("shape " + shape_str(shape_) + " does not match " + std::to_string(data_.size()) +
                     " values");
  }
}

Tensor Tensor::reshaped(Shape shape) const {
  if (numel(shape) != static_cast<std::int64_t>(data_.size())) {
    throw ShapeError("cannot reshape " + shape_str(shape_) + " to " + shape_str(shape));
  }
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(float value) { std::fill(data_.begin(), data_.end(), value); }

Tensor slice_channels(const Tensor& t, std::int64_t begin, std::int64_t end) {
  if (t.rank() != 4 || begin < 0 || end > t.dim(1) || begin > end) {
    throw ShapeError("invalid channel slice [" + std::to_string(begin) + "," + std::to_string(end) + ") of " +
                     shape_str(t.shape()));
  }
  const auto batch = t.dim(0), channels = t.dim(1), plane = t.dim(2) * t.dim(3);
  Tensor out({batch, end - begin, t.dim(2), t.dim(3)});
  for (std::int64_t b = 0; b < batch; ++b) {
    const float* src = t.raw() + (b * channels + begin) * plane;
    std::memcpy(out.raw() + b * (end - begin) * plane, src, sizeof(float) * (end - begin) * plane);
  }
  return out;
}

Tensor slice_batch(const Tensor& t, std::int64_t begin, std::int64_t end) {
  if (t.rank() == 0 || begin < 0 || end > t.dim(0) || begin > end) {
    throw ShapeError("invalid batch slice of " + shape_str(t.shape()));
  }
  Shape shape = t.shape();
  const auto item = numel(shape) / std::max<std::int64_t>(shape[0], 1);
  shape[0] = end - begin;
  std::vector<float> values(t.data().begin() + begin * item, t.data().begin() + end * item);
  return Tensor(std::move(shape), std::move(values));
}

Tensor stack(std::span<const Tensor> items) {
  if (items.empty()) throw ShapeError("cannot stack an empty list");
  Shape shape = items.front().shape();
  std::vector<float> values;
  values.reserve(items.size() * items.front().size());
  for (const auto& item : items) {
    if (item.shape() != shape) {
      throw ShapeError("stack: " + shape_str(item.shape()) + " differs from " + shape_str(shape));
    }
    values.insert(values.end(), item.data().begin(), item.data().end());
  }
  shape.insert(shape.begin(), static_cast<std::int64_t>(items.size()));
  return Tensor(std::move(shape), std::move(values));
}

double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw ShapeError("dot: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

double l2_norm(const Tensor& t) { return std::sqrt(dot(t, t)); }

double mean(const Tensor& t) {
  if (t.empty()) return 0.0;
  double acc = 0.0;
  for (float v : t.data()) acc += v;
  return acc / static_cast<double>(t.size());
}

double mean_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("mean_abs_diff: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  if (a.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(static_cast<double>(a[i]) - b[i]);
  return acc / static_cast<double>(a.size());
}

bool all_finite(const Tensor& t) {
  for (float v : t.data()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::uint64_t content_hash(const Tensor& t, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (const std::int64_t d : t.shape()) {
    h ^= static_cast<std::uint64_t>(d);
    h *= 0x100000001b3ULL;
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(t.raw());
  for (std::size_t i = 0; i < t.size() * sizeof(float); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace sketchpair
