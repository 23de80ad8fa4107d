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
#include <string>
#include <vector>

namespace sketchpair {

enum class Split { Train, Val, Test };

std::string split_name(Split split);
Split parse_split(const std::string& text);

/// One (image, sketch, label) row. Paths are relative to the manifest's directory.
struct PairRecord {
  std::string image_path;
  std::string sketch_path;
  int label_id = 0;
  std::string label_name;
  Split split = Split::Train;

  bool operator==(const PairRecord&) const = default;
};

/// Tab-separated rows under the header
///   image_path  sketch_path  label_id  label_name  split
/// plus a sidecar class table `<stem>.classes.tsv` with header
///   label_id  label_name
/// listing ids 0..N-1 in order.
struct Manifest {
  std::vector<PairRecord> rows;
  std::vector<std::string> classes;

  bool operator==(const Manifest&) const = default;
};

inline constexpr const char* kManifestHeader = "image_path\tsketch_path\tlabel_id\tlabel_name\tsplit";
inline constexpr const char* kClassTableHeader = "label_id\tlabel_name";

std::filesystem::path class_table_path(const std::filesystem::path& manifest_path);

/// Writes the manifest and its class table atomically. Rejects labels that
/// disagree with the class table.
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

/// Resolves a manifest-relative path.
std::filesystem::path resolve_path(const std::filesystem::path& manifest_path, const std::string& relative);

struct SplitFractions {
  double train = 0.90;
  double val = 0.05;
};

/// Deterministic split for row `index` under `seed`.
Split assign_split(std::uint64_t seed, std::size_t index, const SplitFractions& fractions);

}  // namespace sketchpair
