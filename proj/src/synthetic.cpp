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

#include "sketchpair/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sketchpair/errors.hpp"
#include "sketchpair/ops.hpp"

namespace fs = std::filesystem;

namespace sketchpair {
namespace {

struct Placement {
  double cx, cy, r;
};

bool inside(ShapeKind kind, const Placement& p, double x, double y) {
  const double dx = x - p.cx, dy = y - p.cy, r = p.r;
  switch (kind) {
    case ShapeKind::Circle:
      return dx * dx + dy * dy <= r * r;
    case ShapeKind::Square:
      return std::max(std::abs(dx), std::abs(dy)) <= 0.8 * r;
    case ShapeKind::Triangle:
      // Upward triangle inscribed in the circle of radius r.
      return dy <= 0.5 * r && std::abs(dx) <= (dy + r) / std::sqrt(3.0);
    case ShapeKind::Diamond:
      return std::abs(dx) + std::abs(dy) <= r;
    case ShapeKind::Cross:
      return (std::abs(dx) <= r / 3 && std::abs(dy) <= r) || (std::abs(dy) <= r / 3 && std::abs(dx) <= r);
  }
  return false;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

ShapeKind shape_of_class(int label_id) { return static_cast<ShapeKind>(label_id % 5); }

const char* shape_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Circle: return "circle";
    case ShapeKind::Square: return "square";
    case ShapeKind::Triangle: return "triangle";
    case ShapeKind::Diamond: return "diamond";
    case ShapeKind::Cross: return "cross";
  }
  return "shape";
}

std::array<std::uint8_t, 3> class_color(int label_id, int num_classes) {
  // Hues evenly spread over the wheel; saturated and darker than any background.
  const double h = 6.0 * label_id / std::max(1, num_classes);
  const double s = 0.9, v = 0.75;
  const int sector = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  double r = v, g = t, b = p;
  switch (sector) {
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    case 5: r = v; g = p; b = q; break;
    default: break;
  }
  return {to_byte(r), to_byte(g), to_byte(b)};
}

SyntheticSample draw_sample(int label_id, int num_classes, int index, int size, std::uint64_t seed) {
  std::mt19937_64 rng(stream_key(seed, "synthetic/" + std::to_string(label_id), index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Placement place{size * (0.4 + 0.2 * unit(rng)), size * (0.4 + 0.2 * unit(rng)), size * (0.22 + 0.1 * unit(rng))};
  std::array<std::uint8_t, 3> background{};
  for (auto& c : background) c = static_cast<std::uint8_t>(170 + static_cast<int>(60 * unit(rng)));
  const auto fill = class_color(label_id, num_classes);
  const ShapeKind kind = shape_of_class(label_id);

  auto in = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < size && y < size && inside(kind, place, x + 0.5, y + 0.5);
  };
  SyntheticSample s{Image8(size, size, 3), Image8(size, size, 1, 255)};
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const bool filled = in(x, y);
      for (int c = 0; c < 3; ++c) s.image.at(x, y, c) = filled ? fill[c] : background[c];
      const bool boundary = filled && !(in(x - 1, y) && in(x + 1, y) && in(x, y - 1) && in(x, y + 1));
      if (boundary) s.outline.at(x, y) = 0;
    }
  }
  return s;
}

fs::path make_synthetic_corpus(const fs::path& out_dir, int n_per_class, int num_classes, int size,
                               std::uint64_t seed) {
  if (num_classes < 1) throw UsageError("num_classes must be at least 1");
  if (n_per_class < 1) throw UsageError("n_per_class must be at least 1");
  if (size < 4) throw UsageError("synthetic images must be at least 4x4");
  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "outlines");

  Manifest m;
  for (int c = 0; c < num_classes; ++c) {
    m.classes.push_back("c" + std::to_string(c) + "_" + shape_name(shape_of_class(c)));
  }
  for (int c = 0; c < num_classes; ++c) {
    for (int i = 0; i < n_per_class; ++i) {
      const std::string name = "c" + std::to_string(c) + "_" + std::to_string(i) + ".png";
      const SyntheticSample s = draw_sample(c, num_classes, i, size, seed);
      write_png(s.image, out_dir / "images" / name);
      write_png(s.outline, out_dir / "outlines" / name);
      m.rows.push_back({"images/" + name, "outlines/" + name, c, m.classes[static_cast<std::size_t>(c)],
                        assign_split(seed, m.rows.size(), {})});
    }
  }
  const fs::path manifest = out_dir / "manifest.tsv";
  write_manifest(manifest, m);
  return manifest;
}

}  // namespace sketchpair
