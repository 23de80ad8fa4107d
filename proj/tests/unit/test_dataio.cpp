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

#include <doctest.h>

#include <cstdio>
#include <jpeglib.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "sketchpair/checkpoint.hpp"
#include "sketchpair/config.hpp"
#include "sketchpair/dataset.hpp"
#include "sketchpair/encoder.hpp"
#include "sketchpair/errors.hpp"
#include "sketchpair/image_io.hpp"
#include "sketchpair/manifest.hpp"
#include "sketchpair/pairgen.hpp"
#include "sketchpair/synthetic.hpp"
#include "support/temp_dir.hpp"

using namespace sketchpair;
using namespace sketchpair::testing;
namespace fs = std::filesystem;

namespace {

void write_jpeg(const Image8& img, const fs::path& path) {
  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  FILE* f = std::fopen(path.c_str(), "wb");
  REQUIRE(f != nullptr);
  jpeg_stdio_dest(&cinfo, f);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = img.channels;
  cinfo.in_color_space = img.channels == 3 ? JCS_RGB : JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, 100, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(&img.pixels[static_cast<std::size_t>(cinfo.next_scanline) * img.width * img.channels]);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(f);
}

Image8 random_image(int w, int h, int channels, std::mt19937_64& rng) {
  Image8 img(w, h, channels);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

CheckpointError::Kind load_failure(const fs::path& path) {
  try {
    load_checkpoint(path);
  } catch (const CheckpointError& e) {
    return e.kind();
  }
  FAIL("checkpoint loaded");
  return CheckpointError::Kind::Io;
}

std::vector<std::string> directory_entries(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

TEST_CASE("byte values map affinely onto [-1, 1]") {
  Image8 img(3, 1, 1);
  img.pixels = {0, 255, 128};
  const Tensor t = image_to_tensor(img, 3, ColorMode::Gray);
  CHECK(t.shape() == Shape{3, 3, 3});
  // Row 0 only: the 3x1 image is resampled to 3x3 rows of identical values.
  CHECK(t[0] == -1.0f);
  CHECK(t[1] == 1.0f);
  CHECK(t[2] == doctest::Approx(128 / 127.5 - 1.0).epsilon(1e-6));
  CHECK(t[2] == doctest::Approx(0.00392).epsilon(1e-3));
  for (int v = 0; v < 256; ++v) CHECK(unit_to_byte(byte_to_unit(static_cast<std::uint8_t>(v))) == v);
  CHECK(unit_to_byte(-3.0f) == 0);
  CHECK(unit_to_byte(3.0f) == 255);
}

TEST_CASE("a 1x1 white image upscales to a constant tensor") {
  TempDir dir("io");
  write_png(Image8(1, 1, 1, 255), dir / "w.png");
  const Tensor t = load_image(dir / "w.png", 4, ColorMode::Gray);
  CHECK(t == Tensor({3, 4, 4}, 1.0f));
  CHECK(load_image(dir / "w.png", 4, ColorMode::Rgb) == Tensor({3, 4, 4}, 1.0f));
}

TEST_CASE("native-size images round trip losslessly") {
  TempDir dir("io");
  std::mt19937_64 rng(1);
  for (int channels : {1, 3}) {
    const Image8 img = random_image(7, 5, channels, rng);
    write_png(img, dir / "x.png");
    CHECK(read_image(dir / "x.png") == img);
  }
  const Image8 square = random_image(6, 6, 3, rng);
  write_png(square, dir / "sq.png");
  const Tensor t = load_image(dir / "sq.png", 6, ColorMode::Rgb);
  CHECK(tensor_to_image(t, ColorMode::Rgb) == square);
  const Image8 gray = random_image(6, 6, 1, rng);
  write_png(gray, dir / "g.png");
  CHECK(tensor_to_image(load_image(dir / "g.png", 6, ColorMode::Gray), ColorMode::Gray) == gray);
}

TEST_CASE("JPEG files decode") {
  TempDir dir("io");
  write_jpeg(Image8(8, 8, 3, 200), dir / "c.jpg");
  const Image8 img = read_image(dir / "c.jpg");
  CHECK(img.width == 8);
  CHECK(img.channels == 3);
  for (auto p : img.pixels) CHECK(std::abs(p - 200) <= 1);
  write_jpeg(Image8(4, 4, 1, 10), dir / "g.jpeg");
  CHECK(read_image(dir / "g.jpeg").channels == 1);
  CHECK(list_images(dir.path()) == std::vector<fs::path>{dir / "c.jpg", dir / "g.jpeg"});
}

TEST_CASE("unreadable images raise data errors naming the path") {
  TempDir dir("io");
  CHECK_THROWS_WITH_AS(read_image(dir / "missing.png"), doctest::Contains("missing.png"), DataError);
  write_file(dir / "bad.png", "\x89PNG but not really");
  CHECK_THROWS_WITH_AS(read_image(dir / "bad.png"), doctest::Contains("bad.png"), DataError);
  write_file(dir / "bad.jpg", "\xff\xd8\xff garbage");
  CHECK_THROWS_WITH_AS(load_image(dir / "bad.jpg", 4, ColorMode::Gray), doctest::Contains("bad.jpg"), DataError);
}

TEST_CASE("atomic writes leave no temporary files and fail cleanly") {
  TempDir dir("io");
  atomic_write(dir / "a.txt", "first");
  atomic_write(dir / "a.txt", "second");
  CHECK(read_file(dir / "a.txt") == "second");
  write_png(Image8(2, 2, 1, 9), dir / "p.png");
  CHECK(directory_entries(dir.path()) == std::vector<std::string>{"a.txt", "p.png"});
  write_file(dir / "blocker", "a file, not a directory");
  CHECK_THROWS(atomic_write(dir / "blocker" / "x.txt", "data"));
  CHECK(read_file(dir / "blocker") == "a file, not a directory");
}

TEST_CASE("manifest round trip and validation") {
  TempDir dir("manifest");
  Manifest m;
  m.classes = {"cat", "dog house"};
  m.rows = {{"images/a.png", "sketches/a.png", 0, "cat", Split::Train},
            {"images/b.png", "sketches/b.png", 1, "dog house", Split::Val},
            {"images/c.png", "sketches/c.png", 1, "dog house", Split::Test}};
  write_manifest(dir / "m.tsv", m);
  CHECK(read_manifest(dir / "m.tsv") == m);
  CHECK(fs::exists(class_table_path(dir / "m.tsv")));
  CHECK(read_file(dir / "m.tsv").starts_with(std::string(kManifestHeader) + "\n"));
  CHECK(resolve_path(dir / "m.tsv", "images/a.png") == dir / "images/a.png");

  Manifest wrong = m;
  wrong.rows[0].label_name = "dog house";
  CHECK_THROWS_AS(write_manifest(dir / "w.tsv", wrong), DataError);
  Manifest tab = m;
  tab.rows[0].image_path = "a\tb.png";
  CHECK_THROWS_AS(write_manifest(dir / "t.tsv", tab), DataError);

  write_file(dir / "noheader.tsv", "a\tb\t0\tcat\ttrain\n");
  CHECK_THROWS_AS(read_manifest(dir / "noheader.tsv"), DataError);
  write_file(dir / "short.tsv", std::string(kManifestHeader) + "\na\tb\t0\n");
  CHECK_THROWS_AS(read_manifest(dir / "short.tsv"), DataError);
  CHECK_THROWS_AS(parse_split("holdout"), DataError);
}

TEST_CASE("splits are seeded and follow the fractions") {
  const SplitFractions f{0.9, 0.05};
  std::map<Split, int> counts;
  for (std::size_t i = 0; i < 20000; ++i) {
    const Split s = assign_split(3, i, f);
    CHECK(s == assign_split(3, i, f));
    ++counts[s];
  }
  CHECK(counts[Split::Train] / 20000.0 == doctest::Approx(0.9).epsilon(0.02));
  CHECK(counts[Split::Val] / 20000.0 == doctest::Approx(0.05).epsilon(0.15));
  int differ = 0;
  for (std::size_t i = 0; i < 200; ++i) differ += assign_split(3, i, f) != assign_split(4, i, f);
  CHECK(differ > 0);
}

TEST_CASE("checkpoints round trip bit-exactly") {
  TempDir dir("ckpt");
  auto q = EncoderQuartet::build("D4-D8-U4-U3", "D4-D8", 8, 7);
  const Network* nets[] = {&q.G, &q.F, &q.DX, &q.DY};
  const CheckpointMetadata meta{1234, 2.5e-5, 99, "preset = small\nseed = 99\n"};
  save_checkpoint(dir / "q.ckpt", nets, meta);
  Checkpoint back = load_checkpoint(dir / "q.ckpt");
  CHECK(back.metadata == meta);
  REQUIRE(back.networks.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    const Network& a = *nets[i];
    Network& b = back.networks[i];
    CHECK(b.name() == a.name());
    CHECK(b.role() == a.role());
    CHECK(b.spec().arch() == a.spec().arch());
    CHECK(b.spec().input_channels == a.spec().input_channels);
    CHECK(b.count_params() == a.count_params());
    REQUIRE(b.parameter_storage().size() == a.parameter_storage().size());
    for (std::size_t k = 0; k < a.parameter_storage().size(); ++k) {
      CHECK(b.parameter_storage()[k].name == a.parameter_storage()[k].name);
      CHECK(b.parameter_storage()[k].value == a.parameter_storage()[k].value);
    }
  }
  CHECK(parameter_hash(back.network("G").parameters()) == parameter_hash(q.G.parameters()));
  // Saving the loaded networks again reproduces the file.
  const Network* again[] = {&back.networks[0], &back.networks[1], &back.networks[2], &back.networks[3]};
  save_checkpoint(dir / "again.ckpt", again, back.metadata);
  CHECK(read_file(dir / "again.ckpt") == read_file(dir / "q.ckpt"));
}

TEST_CASE("corrupt checkpoints are rejected by category") {
  TempDir dir("ckpt");
  auto q = EncoderQuartet::build("D4-D8-U4-U3", "D4-D8", 8, 7);
  const Network* nets[] = {&q.G};
  save_checkpoint(dir / "g.ckpt", nets, {});
  const std::string bytes = read_file(dir / "g.ckpt");

  for (std::size_t cut : {std::size_t{1}, std::size_t{9}, bytes.size() / 2, bytes.size() - 4}) {
    write_file(dir / "t.ckpt", bytes.substr(0, bytes.size() - cut));
    CHECK(load_failure(dir / "t.ckpt") == CheckpointError::Kind::Truncated);
  }
  std::string flipped = bytes;
  flipped[bytes.size() / 2] = static_cast<char>(flipped[bytes.size() / 2] ^ 0x40);
  write_file(dir / "f.ckpt", flipped);
  CHECK(load_failure(dir / "f.ckpt") == CheckpointError::Kind::Truncated);

  std::string magic = bytes;
  magic[0] = 'X';
  write_file(dir / "m.ckpt", magic);
  CHECK(load_failure(dir / "m.ckpt") == CheckpointError::Kind::BadMagic);

  std::string version = bytes;
  version[8] = static_cast<char>(kCheckpointVersion + 1);
  write_file(dir / "v.ckpt", version);
  CHECK(load_failure(dir / "v.ckpt") == CheckpointError::Kind::VersionMismatch);

  CHECK(load_failure(dir / "absent.ckpt") == CheckpointError::Kind::Io);

  Checkpoint ok = load_checkpoint(dir / "g.ckpt");
  try {
    ok.network("G", "D4-D16-U4-U3");
    FAIL("architecture accepted");
  } catch (const CheckpointError& e) {
    CHECK(e.kind() == CheckpointError::Kind::ArchitectureMismatch);
    CHECK(std::string(e.what()).find("D4-D8-U4-U3") != std::string::npos);
    CHECK(std::string(e.what()).find("D4-D16-U4-U3") != std::string::npos);
  }
  try {
    ok.network("F");
    FAIL("missing network found");
  } catch (const CheckpointError& e) {
    CHECK(e.kind() == CheckpointError::Kind::MissingNetwork);
  }
}

TEST_CASE("configuration defaults hold the full-scale hyperparameters") {
  const RunConfig c;
  CHECK(c.resolved_image_size() == 256);
  CHECK(c.resolved_encoder_generator() == presets::kEncoderGenerator);
  CHECK(c.resolved_encoder_discriminator() == presets::kEncoderDiscriminator);
  CHECK(c.resolved_decoder_generator() == presets::kDecoderGenerator);
  CHECK(c.resolved_decoder_discriminator() == presets::kDecoderDiscriminator);
  const EncoderTrainConfig e = c.encoder();
  CHECK(e.batch_size == 4);
  CHECK(e.lambda_cyc == 10.0);
  CHECK(e.lr == 1e-4);
  CHECK(e.lr_decay_factor == 10.0);
  CHECK(e.gan_loss == GanLossForm::NonSaturating);
  CHECK(e.adam.beta1 == 0.5);
  const DecoderTrainConfig d = c.decoder();
  CHECK(d.batch_size == 4);
  CHECK(d.lambda_l1 == 100.0);
  CHECK(d.lr == 1e-6);
  CHECK(d.targets == LsganTargets::Standard);
  CHECK(d.label_encoding == LabelEncoding::Scalar);
  CHECK(d.disc_input == DiscriminatorInput::SketchLabelImage);
  const NetworkOptions n = c.network_options();
  CHECK(n.generator_alpha == 0.2f);
  CHECK(n.dropout_rate == 0.5f);
  CHECK(n.init_std == 0.02);

  RunConfig small;
  small.set("preset", "small");
  CHECK(small.resolved_image_size() == 32);
  CHECK(small.resolved_encoder_generator() == presets::kSmallEncoderGenerator);
}

TEST_CASE("configuration text: comments, errors and snapshot round trip") {
  RunConfig c;
  c.apply_text("# comment\n\nlambda_cyc = 3   # trailing\n  encoder_generator =D8-D8-U8-U3\n", "test");
  CHECK(c.lambda_cyc == 3.0);
  CHECK(c.resolved_encoder_generator() == "D8-D8-U8-U3");
  CHECK_THROWS_WITH_AS(c.apply_text("no_such_key = 1\n", "f.cfg"), doctest::Contains("f.cfg:1"), UsageError);
  CHECK_THROWS_WITH_AS(c.apply_text("\nlambda_cyc = ten\n", "f.cfg"), doctest::Contains("f.cfg:2"), UsageError);
  CHECK_THROWS_AS(c.apply_text("lambda_cyc\n"), UsageError);
  CHECK_THROWS_AS(c.set("gan_loss", "wasserstein"), UsageError);
  CHECK_THROWS_AS(c.set("encoder_generator", "D8-X8"), UsageError);
  CHECK_THROWS_AS(c.set("encoder_batch_size", "2.5"), UsageError);
  CHECK_THROWS_AS(c.get("nope"), UsageError);

  RunConfig back;
  back.apply_text(c.snapshot());
  CHECK(back.snapshot() == c.snapshot());
  std::set<std::string> keys;
  for (const auto& k : config_keys()) {
    CHECK(keys.insert(k.name).second);
    const bool listed = ("\n" + c.snapshot()).find("\n" + k.name + " = ") != std::string::npos;
    CHECK_MESSAGE(listed, k.name);
  }
}

TEST_CASE("synthetic corpus: counts, binary outlines, determinism") {
  TempDir dir("synthetic");
  const fs::path m1 = make_synthetic_corpus(dir / "a", 10, 2, 32, 5);
  const fs::path m2 = make_synthetic_corpus(dir / "b", 10, 2, 32, 5);
  const Manifest m = read_manifest(m1);
  CHECK(m.rows.size() == 20);
  CHECK(m.classes.size() == 2);
  CHECK(list_images(dir / "a" / "images").size() == 20);
  std::vector<fs::path> outlines = list_images(dir / "a" / "outlines");
  CHECK(outlines.size() == 20);
  CHECK(binary_mass_fraction(pixel_histogram(outlines)) == 1.0);
  CHECK(read_file(m1) == read_file(m2));
  for (const auto& row : m.rows) {
    CHECK(read_file(resolve_path(m1, row.image_path)) == read_file(resolve_path(m2, row.image_path)));
    CHECK(read_file(resolve_path(m1, row.sketch_path)) == read_file(resolve_path(m2, row.sketch_path)));
  }
  const fs::path m3 = make_synthetic_corpus(dir / "c", 10, 2, 32, 6);
  CHECK(read_file(resolve_path(m3, m.rows[0].image_path)) != read_file(resolve_path(m1, m.rows[0].image_path)));

  // Classes differ in shape and fill color.
  CHECK(shape_of_class(0) != shape_of_class(1));
  CHECK(class_color(0, 2) != class_color(1, 2));
  const auto s = draw_sample(1, 2, 0, 32, 5);
  CHECK(s.image.channels == 3);
  CHECK(s.outline.channels == 1);
  CHECK(std::count(s.outline.pixels.begin(), s.outline.pixels.end(), 0) > 0);
}

TEST_CASE("batch sampler yields seeded permutations per epoch") {
  BatchSampler a(10, 5, 3), b(10, 5, 3), c(10, 5, 4);
  std::vector<std::size_t> epoch;
  for (int i = 0; i < 2; ++i) {
    const auto batch = a.next();
    CHECK(batch.size() == 5);
    CHECK(batch == b.next());
    epoch.insert(epoch.end(), batch.begin(), batch.end());
  }
  std::vector<std::size_t> sorted = epoch;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(sorted[i] == i);
  CHECK(a.epoch() == 0);
  a.next();
  CHECK(a.epoch() == 1);
  std::vector<std::size_t> first_c = c.next();
  CHECK_FALSE(first_c == std::vector<std::size_t>(epoch.begin(), epoch.begin() + 5));

  BatchSampler small(3, 4, 1);
  CHECK(small.next().size() == 4);
}

TEST_CASE("paired dataset reads one split of a manifest") {
  TempDir dir("dataset");
  const fs::path corpus = make_synthetic_corpus(dir / "c", 20, 2, 16, 2);
  const Manifest m = read_manifest(corpus);
  const auto train = PairedDataset::from_manifest(corpus, Split::Train);
  const auto count = std::count_if(m.rows.begin(), m.rows.end(), [](const auto& r) { return r.split == Split::Train; });
  CHECK(train.size() == static_cast<std::size_t>(count));
  CHECK(train.num_classes == 2);
  const std::size_t idx[] = {0, 1};
  const Tensor batch = load_batch(train.images, idx, 16, ColorMode::Rgb);
  CHECK(batch.shape() == Shape{2, 3, 16, 16});
}
