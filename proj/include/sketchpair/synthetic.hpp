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

#include "sketchpair/image_io.hpp"
#include "sketchpair/manifest.hpp"

namespace sketchpair {

enum class ShapeKind { Circle, Square, Triangle, Diamond, Cross };

/// Shape type of a class: classes cycle through the five kinds.
ShapeKind shape_of_class(int label_id);
const char* shape_name(ShapeKind kind);

/// Fill color of a class (RGB); distinct for distinct classes.
std::array<std::uint8_t, 3> class_color(int label_id, int num_classes);

struct SyntheticSample {
  Image8 image;    ///< RGB: filled shape on a random non-white background
  Image8 outline;  ///< gray: black shape boundary on white
};

/// One procedurally drawn sample; deterministic in (seed, label_id, index).
SyntheticSample draw_sample(int label_id, int num_classes, int index, int size, std::uint64_t seed);

/// Writes images/c<label>_<i>.png, outlines/c<label>_<i>.png and manifest.tsv
/// (sketch_path pointing at the outline) under out_dir; returns the manifest path.
std::filesystem::path make_synthetic_corpus(const std::filesystem::path& out_dir, int n_per_class, int num_classes,
                                            int size, std::uint64_t seed);

}  // namespace sketchpair
