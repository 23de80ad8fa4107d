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

#include "sketchpair/manifest.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "sketchpair/errors.hpp"
#include "sketchpair/image_io.hpp"
#include "sketchpair/ops.hpp"

namespace sketchpair {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

void check_field(const std::string& value, const char* what) {
  if (value.find_first_of("\t\r\n") != std::string::npos) {
    throw DataError(std::string("manifest ") + what + " contains a tab or newline: " + value);
  }
}

int parse_label(const std::string& text, const fs::path& path, std::size_t line) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value < 0) {
    throw DataError(path.string() + ":" + std::to_string(line) + ": invalid label id '" + text + "'");
  }
  return value;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string split_name(Split split) {
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::Test:
      return "test";
  }
  return "train";
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::Train;
  if (text == "val") return Split::Val;
  if (text == "test") return Split::Test;
  throw DataError("unknown split '" + text + "'");
}

fs::path class_table_path(const fs::path& manifest_path) {
  fs::path out = manifest_path;
  out.replace_filename(manifest_path.stem().string() + ".classes.tsv");
  return out;
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
  std::ostringstream table;
  table << kClassTableHeader << '\n';
  for (std::size_t i = 0; i < manifest.classes.size(); ++i) {
    check_field(manifest.classes[i], "label name");
    table << i << '\t' << manifest.classes[i] << '\n';
  }
  std::ostringstream rows;
  rows << kManifestHeader << '\n';
  for (const PairRecord& r : manifest.rows) {
    if (r.label_id < 0 || static_cast<std::size_t>(r.label_id) >= manifest.classes.size() ||
        manifest.classes[static_cast<std::size_t>(r.label_id)] != r.label_name) {
      throw DataError("manifest row " + r.image_path + ": label " + std::to_string(r.label_id) + " (" + r.label_name +
                      ") disagrees with the class table");
    }
    check_field(r.image_path, "image path");
    check_field(r.sketch_path, "sketch path");
    rows << r.image_path << '\t' << r.sketch_path << '\t' << r.label_id << '\t' << r.label_name << '\t'
         << split_name(r.split) << '\n';
  }
  atomic_write(class_table_path(path), table.str());
  atomic_write(path, rows.str());
}

Manifest read_manifest(const fs::path& path) {
  Manifest manifest;
  const fs::path table_path = class_table_path(path);
  const auto table = read_lines(table_path);
  if (table.empty() || table.front() != kClassTableHeader) {
    throw DataError(table_path.string() + ": missing class table header");
  }
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (table[i].empty()) continue;
    const auto fields = split_tabs(table[i]);
    if (fields.size() != 2) throw DataError(table_path.string() + ":" + std::to_string(i + 1) + ": expected 2 fields");
    const int id = parse_label(fields[0], table_path, i + 1);
    if (static_cast<std::size_t>(id) != manifest.classes.size()) {
      throw DataError(table_path.string() + ": label ids must be consecutive from 0");
    }
    manifest.classes.push_back(fields[1]);
  }

  const auto lines = read_lines(path);
  if (lines.empty() || lines.front() != kManifestHeader) throw DataError(path.string() + ": missing manifest header");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_tabs(lines[i]);
    if (fields.size() != 5) throw DataError(path.string() + ":" + std::to_string(i + 1) + ": expected 5 fields");
    PairRecord r;
    r.image_path = fields[0];
    r.sketch_path = fields[1];
    r.label_id = parse_label(fields[2], path, i + 1);
    r.label_name = fields[3];
    r.split = parse_split(fields[4]);
    if (static_cast<std::size_t>(r.label_id) >= manifest.classes.size() ||
        manifest.classes[static_cast<std::size_t>(r.label_id)] != r.label_name) {
      throw DataError(path.string() + ":" + std::to_string(i + 1) + ": label " + fields[2] + " (" + r.label_name +
                      ") not in the class table");
    }
    manifest.rows.push_back(std::move(r));
  }
  return manifest;
}

fs::path resolve_path(const fs::path& manifest_path, const std::string& relative) {
  const fs::path p(relative);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

Split assign_split(std::uint64_t seed, std::size_t index, const SplitFractions& fractions) {
  const std::uint64_t bits = stream_key(seed, "split", static_cast<std::int64_t>(index));
  const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
  if (u < fractions.train) return Split::Train;
  if (u < fractions.train + fractions.val) return Split::Val;
  return Split::Test;
}

}  // namespace sketchpair
