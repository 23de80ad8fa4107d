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
#include <string_view>
#include <vector>

#include "sketchpair/tensor.hpp"

namespace sketchpair {

/// 8-bit image, interleaved (row, column, channel). channels is 1 or 3.
struct Image8 {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  Image8() = default;
  Image8(int width, int height, int channels, std::uint8_t fill = 0);

  std::uint8_t& at(int x, int y, int c = 0) { return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  bool operator==(const Image8&) const = default;
};

enum class ColorMode { Gray, Rgb };

/// Decodes PNG or JPEG (detected from the file signature). Throws DataError naming the path.
Image8 read_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG atomically (temporary file, then rename).
void write_png(const Image8& image, const std::filesystem::path& path);

/// Writes bytes to `path` through a temporary sibling and a rename.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);

Image8 to_gray(const Image8& image);

/// 8-bit to [-1, 1]: v / 127.5 - 1.
inline float byte_to_unit(std::uint8_t v) { return static_cast<float>(v / 127.5 - 1.0); }
/// [-1, 1] to 8-bit: round((v + 1) * 127.5), clamped.
std::uint8_t unit_to_byte(float v);

/// (3, size, size) tensor in [-1, 1]. Bilinear resampling when the image is
/// not already size x size; gray mode converts to luminance and replicates it
/// over the three channels.
Tensor image_to_tensor(const Image8& image, int target_size, ColorMode mode);
Tensor load_image(const std::filesystem::path& path, int target_size, ColorMode mode);

/// (C, H, W) tensor to an 8-bit image. Gray mode averages the channels.
Image8 tensor_to_image(const Tensor& chw, ColorMode mode);

/// Image files (.png, .jpg, .jpeg) directly inside `dir`, sorted by name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace sketchpair
