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

#include "sketchpair/netspec.hpp"

#include <charconv>

#include "sketchpair/errors.hpp"

namespace sketchpair {

std::vector<LayerToken> parse_spec(std::string_view text) {
  std::vector<LayerToken> tokens;
  std::size_t position = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = text.find('-', start);
    const std::string_view segment = text.substr(start, end == std::string_view::npos ? end : end - start);
    ++position;
    const std::string seg(segment);
    if (segment.empty()) {
      throw ParseError(seg, position, end == std::string_view::npos && position > 1 ? "trailing separator"
                                                                                    : "empty segment");
    }
    LayerKind kind;
    switch (segment.front()) {
      case 'D':
        kind = LayerKind::Down;
        break;
      case 'U':
        kind = LayerKind::Up;
        break;
      case 'R':
        kind = LayerKind::Residual;
        break;
      default:
        throw ParseError(seg, position, "unknown layer prefix '" + std::string(1, segment.front()) + "'");
    }
    const std::string_view digits = segment.substr(1);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string_view::npos) {
      throw ParseError(seg, position, "expected a channel count after the layer prefix");
    }
    int channels = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), channels);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw ParseError(seg, position, "channel count out of range");
    }
    if (channels < 1) throw ParseError(seg, position, "channel count must be positive");
    tokens.push_back({kind, channels});
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return tokens;
}

std::string render_spec(std::span<const LayerToken> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += '-';
    out += static_cast<char>(tokens[i].kind);
    out += std::to_string(tokens[i].channels);
  }
  return out;
}

std::vector<SkipPair> pair_skips(std::span<const LayerToken> tokens) {
  std::vector<std::size_t> downs, ups;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind == LayerKind::Down) downs.push_back(i);
    if (tokens[i].kind == LayerKind::Up) ups.push_back(i);
  }
  std::vector<SkipPair> pairs;
  if (ups.empty() || downs.size() != ups.size()) return pairs;
  const std::size_t depth = downs.size();
  // The j-th U consumes the resolution produced by D[depth - 1 - j].
  for (std::size_t j = 1; j < depth; ++j) pairs.push_back({downs[depth - 1 - j], ups[j]});
  return pairs;
}

NetworkSpec NetworkSpec::generator(std::string_view arch, int input_channels, int input_size) {
  NetworkSpec spec;
  spec.tokens = parse_spec(arch);
  spec.input_channels = input_channels;
  spec.input_size = input_size;
  spec.skip_pairs = pair_skips(spec.tokens);
  spec.head = Head::None;
  return spec;
}

NetworkSpec NetworkSpec::discriminator(std::string_view arch, int input_channels, int input_size, Head head) {
  NetworkSpec spec;
  spec.tokens = parse_spec(arch);
  spec.input_channels = input_channels;
  spec.input_size = input_size;
  spec.head = head;
  return spec;
}

std::vector<LayerShape> infer_shapes(const NetworkSpec& spec, const Shape& input) {
  if (input.size() != 3) throw ShapeError("infer_shapes: input must be (C, H, W), got " + shape_str(input));
  std::int64_t c = input[0], h = input[1], w = input[2];
  if (c != spec.input_channels) {
    throw ShapeError("infer_shapes: network takes " + std::to_string(spec.input_channels) + " channels, got " +
                     shape_str(input));
  }
  std::vector<LayerShape> shapes;
  std::vector<std::int64_t> produced(spec.tokens.size(), 0);
  for (std::size_t i = 0; i < spec.tokens.size(); ++i) {
    const LayerToken& t = spec.tokens[i];
    const std::string label = render_spec(std::span(&t, 1));
    const std::string where = "layer " + std::to_string(i + 1) + " (" + label + ")";
    std::int64_t in_c = c;
    switch (t.kind) {
      case LayerKind::Down:
        if (h < 2 || w < 2 || h % 2 || w % 2) {
          throw ShapeError(where + ": cannot halve spatial size " + std::to_string(h) + "x" + std::to_string(w));
        }
        h /= 2;
        w /= 2;
        break;
      case LayerKind::Up:
        for (const SkipPair& p : spec.skip_pairs) {
          if (p.up != i) continue;
          const Shape& skip = shapes.at(p.down).output;
          if (skip[1] != h || skip[2] != w) {
            throw ShapeError(where + ": skip from layer " + std::to_string(p.down + 1) + " has resolution " +
                             std::to_string(skip[1]) + "x" + std::to_string(skip[2]) + ", expected " +
                             std::to_string(h) + "x" + std::to_string(w));
          }
          in_c += skip[0];
        }
        h *= 2;
        w *= 2;
        break;
      case LayerKind::Residual:
        if (t.channels != c) {
          throw ShapeError(where + ": residual block width " + std::to_string(t.channels) +
                           " differs from incoming channel count " + std::to_string(c));
        }
        break;
    }
    c = t.channels;
    shapes.push_back({label, in_c, Shape{c, h, w}});
  }
  if (spec.head == Head::ScalarScore) {
    if (h < 2 || w < 2) {
      throw ShapeError("score head: needs at least 2x2 features, got " + std::to_string(h) + "x" + std::to_string(w));
    }
    shapes.push_back({"head", c, Shape{1}});
  }
  return shapes;
}

}  // namespace sketchpair
