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
#include <span>
#include <string>
#include <vector>

#include "sketchpair/network.hpp"

namespace sketchpair {

struct CheckpointMetadata {
  std::int64_t step = 0;
  double lr = 0.0;
  std::uint64_t seed = 0;
  std::string config;  ///< snapshot of the run configuration, `key = value` lines

  bool operator==(const CheckpointMetadata&) const = default;
};

/// Binary layout, all integers and floats little-endian:
///
///   "SKPCKPT\0"  u32 version
///   i64 step  f64 lr  u64 seed  str config
///   u32 network count, then per network:
///     str name  u8 role  str arch  i32 input_channels  i32 input_size  u8 head
///     f32 generator_alpha  f32 discriminator_alpha  f32 dropout_rate
///     i32 dropout_layers  f64 init_std  f64 norm_eps
///     u32 parameter count, then per parameter:
///       str name  u32 rank  i64 dims[rank]  f32 values[prod(dims)]
///   u64 FNV-1a of every preceding byte
///
/// where str is a u32 byte length followed by the bytes.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  CheckpointMetadata metadata;
  std::vector<Network> networks;

  /// Looks up a network and verifies its architecture string; throws
  /// CheckpointError(ArchitectureMismatch) naming both strings on disagreement.
  Network& network(const std::string& name, std::string_view expected_arch = {});
};

void save_checkpoint(const std::filesystem::path& path, std::span<const Network* const> networks,
                     const CheckpointMetadata& metadata);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sketchpair
