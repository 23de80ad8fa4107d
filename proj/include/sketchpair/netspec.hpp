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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sketchpair/tensor.hpp"

namespace sketchpair {

/// D: 4x4 stride-2 downsampling convolution, U: 4x4 stride-2 transposed
/// convolution, R: residual block of two 3x3 convolutions.
enum class LayerKind : char { Down = 'D', Up = 'U', Residual = 'R' };

struct LayerToken {
  LayerKind kind;
  int channels;

  bool operator==(const LayerToken&) const = default;
};

/// Splits "D64-D128-U3" style notation into tokens. Throws ParseError naming
/// the first offending segment (1-based position).
std::vector<LayerToken> parse_spec(std::string_view text);

/// Canonical notation; inverse of parse_spec.
std::string render_spec(std::span<const LayerToken> tokens);

enum class Head { None, ScalarScore };

/// U-net skip: the output of token `down` is concatenated onto the input of token `up`.
struct SkipPair {
  std::size_t down;
  std::size_t up;

  bool operator==(const SkipPair&) const = default;
};

/// Mirror pairing at equal resolution. The innermost D/U pair is not
/// skipped, since that D's output already is the first U's input.
std::vector<SkipPair> pair_skips(std::span<const LayerToken> tokens);

struct NetworkSpec {
  std::vector<LayerToken> tokens;
  int input_channels = 3;
  int input_size = 256;
  std::vector<SkipPair> skip_pairs;
  Head head = Head::None;

  std::string arch() const { return render_spec(tokens); }

  static NetworkSpec generator(std::string_view arch, int input_channels, int input_size);
  static NetworkSpec discriminator(std::string_view arch, int input_channels, int input_size,
                                   Head head = Head::ScalarScore);
};

struct LayerShape {
  std::string label;       ///< token text, or "head"
  std::int64_t in_channels;  ///< after any skip concatenation
  Shape output;            ///< (C, H, W); (1) for the score head
};

/// Per-layer output shapes for an input of shape (C, H, W). Throws ShapeError
/// naming the layer that cannot be applied.
std::vector<LayerShape> infer_shapes(const NetworkSpec& spec, const Shape& input);

/// The full-size architectures at 256x256, and reduced variants at 32x32
/// that keep the same layer vocabulary and train on one CPU core.
namespace presets {

inline constexpr std::string_view kEncoderGenerator =
    "D32-D64-D128-D256-D256-D256-D256-D256-U512-U512-U512-U512-U256-U128-U64-U3";
inline constexpr std::string_view kEncoderDiscriminator = "D64-D128-D256-D512";
inline constexpr std::string_view kDecoderGenerator =
    "D64-D128-D256-D512-D512-D512-D512-D512-U1024-R1024-R1024-U1024-R1024-R1024-U1024-U1024-U512-U256-U128-U3";
inline constexpr std::string_view kDecoderDiscriminator = "D64-D128-D256-D512";
inline constexpr int kImageSize = 256;

inline constexpr std::string_view kSmallEncoderGenerator = "D32-D64-D128-D128-D128-U128-U128-U64-U32-U3";
inline constexpr std::string_view kSmallEncoderDiscriminator = "D32-D64-D128";
inline constexpr std::string_view kSmallDecoderGenerator = "D32-D64-D128-D128-D128-U128-R128-U128-U64-U32-U3";
inline constexpr std::string_view kSmallDecoderDiscriminator = "D32-D64-D128";
inline constexpr int kSmallImageSize = 32;

}  // namespace presets

}  // namespace sketchpair
