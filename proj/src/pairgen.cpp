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

#include "sketchpair/pairgen.hpp"

#include <json.hpp>
#include <set>

#include "sketchpair/encoder.hpp"
#include "sketchpair/errors.hpp"

namespace fs = std::filesystem;

namespace sketchpair {
namespace {

void check_threshold(int threshold) {
  if (threshold < 0 || threshold > 255) {
    throw UsageError("binarize threshold must be in [0, 255], got " + std::to_string(threshold));
  }
}

// A sketch file name derived from the image's stem, made unique within the run.
std::string sketch_name(const fs::path& image, std::set<std::string>& used) {
  const std::string stem = image.stem().string();
  std::string name = stem + ".png";
  for (int k = 1; used.count(name) != 0; ++k) name = stem + "_" + std::to_string(k) + ".png";
  used.insert(name);
  return name;
}

}  // namespace

Image8 binarize(const Image8& image, int threshold) {
  check_threshold(threshold);
  Image8 out = image;
  for (auto& v : out.pixels) v = v >= threshold ? 255 : 0;
  return out;
}

void PixelHistogram::add(const Image8& image) {
  const Image8 gray = image.channels == 1 ? image : to_gray(image);
  for (std::uint8_t v : gray.pixels) ++counts[v];
  total += static_cast<std::int64_t>(gray.pixels.size());
}

PixelHistogram& PixelHistogram::operator+=(const PixelHistogram& other) {
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  total += other.total;
  return *this;
}

PixelHistogram pixel_histogram(std::span<const fs::path> paths) {
  if (paths.empty()) throw DataError("pixel_histogram: no images given");
  PixelHistogram h;
  for (const auto& path : paths) h.add(read_image(path));
  return h;
}

double binary_mass_fraction(const PixelHistogram& h) {
  if (h.total <= 0) throw DataError("binary_mass_fraction: empty histogram");
  return static_cast<double>(h.counts[0] + h.counts[255]) / static_cast<double>(h.total);
}

double black_fraction(const PixelHistogram& h, int threshold) {
  check_threshold(threshold);
  if (h.total <= 0) throw DataError("black_fraction: empty histogram");
  std::int64_t below = 0;
  for (int v = 0; v < threshold; ++v) below += h.counts[static_cast<std::size_t>(v)];
  return static_cast<double>(below) / static_cast<double>(h.total);
}

std::string SketchReport::to_json() const {
  nlohmann::ordered_json j;
  j["real_total"] = real.total;
  j["fake_total"] = fake.total;
  j["real_binary_fraction"] = real_binary_fraction;
  j["fake_binary_fraction"] = fake_binary_fraction;
  j["difference"] = difference;
  j["sweep"] = nlohmann::ordered_json::array();
  for (const auto& row : sweep) {
    nlohmann::ordered_json r;
    r["threshold"] = row.threshold;
    r["real_black"] = row.real_black;
    r["fake_black"] = row.fake_black;
    j["sweep"].push_back(r);
  }
  j["real_counts"] = real.counts;
  j["fake_counts"] = fake.counts;
  return j.dump(2);
}

SketchReport sketch_report(std::span<const fs::path> real_paths, std::span<const fs::path> fake_paths,
                           std::span<const int> thresholds) {
  SketchReport r;
  r.real = pixel_histogram(real_paths);
  r.fake = pixel_histogram(fake_paths);
  r.real_binary_fraction = binary_mass_fraction(r.real);
  r.fake_binary_fraction = binary_mass_fraction(r.fake);
  // Subtracting in extended precision rounds the difference once, so that
  // e.g. fractions 0.9 and 0.3 report exactly the double nearest 0.6.
  auto exact_fraction = [](const PixelHistogram& h) {
    return static_cast<long double>(h.counts[0] + h.counts[255]) / static_cast<long double>(h.total);
  };
  r.difference = static_cast<double>(exact_fraction(r.real) - exact_fraction(r.fake));
  for (int t : thresholds) r.sweep.push_back({t, black_fraction(r.real, t), black_fraction(r.fake, t)});
  return r;
}

PairgenResult generate_pairs(Network& G, const fs::path& corpus_manifest, const fs::path& out_dir,
                             const PairgenOptions& options) {
  if (options.binarize_threshold) check_threshold(*options.binarize_threshold);
  const Manifest corpus = read_manifest(corpus_manifest);
  const int size = static_cast<int>(G.spec().input_size);
  const fs::path sketch_dir = out_dir / "sketches";
  fs::create_directories(sketch_dir);
  const fs::path out_abs = fs::absolute(out_dir);

  PairgenResult result;
  result.manifest_path = out_dir / "pairs.tsv";
  result.manifest.classes = corpus.classes;
  std::set<std::string> used;
  for (std::size_t i = 0; i < corpus.rows.size(); ++i) {
    const PairRecord& row = corpus.rows[i];
    const fs::path image_path = resolve_path(corpus_manifest, row.image_path);
    Tensor image;
    try {
      image = load_image(image_path, size, options.input_mode);
    } catch (const DataError& e) {
      ++result.skipped;
      if (options.log) options.log("skipped row " + std::to_string(i + 1) + " (" + row.image_path + "): " + e.what());
      continue;
    }
    Image8 sketch = tensor_to_image(encode(G, image), ColorMode::Gray);
    if (options.binarize_threshold) sketch = binarize(sketch, *options.binarize_threshold);
    const std::string name = sketch_name(image_path, used);
    write_png(sketch, sketch_dir / name);

    PairRecord out = row;
    out.image_path = fs::relative(fs::absolute(image_path), out_abs).generic_string();
    out.sketch_path = "sketches/" + name;
    result.manifest.rows.push_back(std::move(out));
  }
  if (result.manifest.rows.empty()) {
    throw DataError("generate_pairs: no corpus row could be encoded (" + std::to_string(result.skipped) + " skipped)");
  }
  write_manifest(result.manifest_path, result.manifest);
  return result;
}

}  // namespace sketchpair
