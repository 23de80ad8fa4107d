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

#include "sketchpair/image_io.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <fstream>
#include <iterator>
#include <unistd.h>

#include "sketchpair/errors.hpp"

namespace sketchpair {
namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Image8 decode_png(const std::vector<unsigned char>& bytes, const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw DataError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image8 out(static_cast<int>(image.width), static_cast<int>(image.height), color ? 3 : 1);
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw DataError("cannot decode PNG " + path.string() + ": " + message);
  }
  return out;
}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void on_jpeg_error(j_common_ptr info) {
  auto* err = reinterpret_cast<JpegError*>(info->err);
  (*info->err->format_message)(info, err->message);
  std::longjmp(err->jump, 1);
}

Image8 decode_jpeg(const std::vector<unsigned char>& bytes, const fs::path& path) {
  jpeg_decompress_struct info{};
  JpegError err{};
  info.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = on_jpeg_error;
  // `out` is not read on the error path, so its value after longjmp does not matter.
  Image8 out;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&info);
    throw DataError("cannot decode JPEG " + path.string() + ": " + err.message);
  }
  jpeg_create_decompress(&info);
  jpeg_mem_src(&info, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&info, TRUE);
  const bool gray = info.jpeg_color_space == JCS_GRAYSCALE;
  info.out_color_space = gray ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&info);
  out = Image8(static_cast<int>(info.output_width), static_cast<int>(info.output_height), gray ? 1 : 3);
  const std::size_t stride = static_cast<std::size_t>(out.width) * out.channels;
  while (info.output_scanline < info.output_height) {
    JSAMPROW row = out.pixels.data() + info.output_scanline * stride;
    jpeg_read_scanlines(&info, &row, 1);
  }
  jpeg_finish_decompress(&info);
  jpeg_destroy_decompress(&info);
  return out;
}

}  // namespace

Image8::Image8(int width, int height, int channels, std::uint8_t fill)
    : width(width), height(height), channels(channels),
      pixels(static_cast<std::size_t>(width) * height * channels, fill) {}

Image8 read_image(const fs::path& path) {
  const auto bytes = read_bytes(path);
  static constexpr unsigned char kPng[] = {0x89, 'P', 'N', 'G'};
  if (bytes.size() >= 4 && std::equal(std::begin(kPng), std::end(kPng), bytes.begin())) return decode_png(bytes, path);
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) return decode_jpeg(bytes, path);
  throw DataError("unrecognized image format: " + path.string());
}

void atomic_write(const fs::path& path, std::string_view bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw DataError("short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

void write_png(const Image8& image, const fs::path& path) {
  if (image.channels != 1 && image.channels != 3) throw DataError("write_png: unsupported channel count");
  png_image info{};
  info.version = PNG_IMAGE_VERSION;
  info.width = static_cast<png_uint_32>(image.width);
  info.height = static_cast<png_uint_32>(image.height);
  info.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&info, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    throw DataError("cannot encode PNG for " + path.string() + ": " + info.message);
  }
  std::string buffer(size, '\0');
  if (!png_image_write_to_memory(&info, buffer.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw DataError("cannot encode PNG for " + path.string() + ": " + info.message);
  }
  buffer.resize(size);
  atomic_write(path, buffer);
}

Image8 to_gray(const Image8& image) {
  if (image.channels == 1) return image;
  Image8 out(image.width, image.height, 1);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double l = 0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) + 0.114 * image.at(x, y, 2);
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(l), 0L, 255L));
    }
  }
  return out;
}

std::uint8_t unit_to_byte(float v) {
  const double scaled = std::round((static_cast<double>(v) + 1.0) * 127.5);
  return static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0));
}

Tensor image_to_tensor(const Image8& image, int target_size, ColorMode mode) {
  if (image.width < 1 || image.height < 1) throw DataError("empty image");
  if (target_size < 1) throw UsageError("target size must be positive");
  const Image8 src = mode == ColorMode::Gray ? to_gray(image) : image;
  const int s = target_size;
  Tensor out({3, s, s});
  for (int c = 0; c < 3; ++c) {
    const int sc = src.channels == 1 ? 0 : c;
    if (src.width == s && src.height == s) {
      for (int y = 0; y < s; ++y) {
        for (int x = 0; x < s; ++x) out[(static_cast<std::size_t>(c) * s + y) * s + x] = byte_to_unit(src.at(x, y, sc));
      }
      continue;
    }
    const double fy = static_cast<double>(src.height) / s;
    const double fx = static_cast<double>(src.width) / s;
    for (int y = 0; y < s; ++y) {
      const double sy = std::clamp((y + 0.5) * fy - 0.5, 0.0, static_cast<double>(src.height - 1));
      const int y0 = static_cast<int>(sy);
      const int y1 = std::min(y0 + 1, src.height - 1);
      const double wy = sy - y0;
      for (int x = 0; x < s; ++x) {
        const double sx = std::clamp((x + 0.5) * fx - 0.5, 0.0, static_cast<double>(src.width - 1));
        const int x0 = static_cast<int>(sx);
        const int x1 = std::min(x0 + 1, src.width - 1);
        const double wx = sx - x0;
        const double top = (1 - wx) * src.at(x0, y0, sc) + wx * src.at(x1, y0, sc);
        const double bottom = (1 - wx) * src.at(x0, y1, sc) + wx * src.at(x1, y1, sc);
        out[(static_cast<std::size_t>(c) * s + y) * s + x] = static_cast<float>(((1 - wy) * top + wy * bottom) / 127.5 - 1.0);
      }
    }
  }
  return out;
}

Tensor load_image(const fs::path& path, int target_size, ColorMode mode) {
  return image_to_tensor(read_image(path), target_size, mode);
}

Image8 tensor_to_image(const Tensor& chw, ColorMode mode) {
  if (chw.rank() != 3) throw ShapeError("tensor_to_image: expected (C, H, W), got " + shape_str(chw.shape()));
  const auto channels = chw.dim(0);
  const int h = static_cast<int>(chw.dim(1)), w = static_cast<int>(chw.dim(2));
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  if (mode == ColorMode::Gray) {
    Image8 out(w, h, 1);
    for (std::size_t i = 0; i < plane; ++i) {
      double acc = 0.0;
      for (std::int64_t c = 0; c < channels; ++c) acc += chw[c * plane + i];
      out.pixels[i] = unit_to_byte(static_cast<float>(acc / static_cast<double>(channels)));
    }
    return out;
  }
  Image8 out(w, h, 3);
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) out.pixels[i * 3 + c] = unit_to_byte(chw[std::min<std::int64_t>(c, channels - 1) * plane + i]);
  }
  return out;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sketchpair
