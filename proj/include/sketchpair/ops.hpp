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
#include <string_view>

#include "sketchpair/autodiff.hpp"

namespace sketchpair {

/// Raw tensor kernels behind the convolution ops. Reductions accumulate in double.
namespace kernels {

/// x (B, Cin, H, W), kernel (Cout, Cin, k, k) -> (B, Cout, H', W').
Tensor conv2d_forward(const Tensor& x, const Tensor& kernel, int stride, int pad);
/// Gradient w.r.t. the input of conv2d_forward; also the forward map of the transposed convolution.
Tensor conv2d_backward_input(const Tensor& out_grad, const Tensor& kernel, const Shape& input_shape, int stride,
                             int pad);
Tensor conv2d_backward_kernel(const Tensor& x, const Tensor& out_grad, const Shape& kernel_shape, int stride, int pad);

}  // namespace kernels

/// Strided 2-D convolution without bias. Stride-2 / pad-1 / 4x4 halves even spatial sizes.
Var conv2d(Var x, Var kernel, int stride, int pad);

/// Transposed convolution; kernel is (Cin, Cout, k, k). The exact adjoint of
/// conv2d with the same kernel, stride and padding.
Var conv_transpose2d(Var x, Var kernel, int stride, int pad);

/// Per-(item, channel) normalization over the spatial plane; gain and bias are (C).
Var instance_norm(Var x, Var gain, Var bias, double eps = 1e-5);

/// alpha = 0 gives the plain rectifier.
Var leaky_relu(Var x, float alpha);
Var tanh(Var x);

/// Inverted dropout. `stream` selects the mask; see stream_key.
Var dropout(Var x, float rate, bool train, std::uint64_t stream);

/// Counter-based random stream id for (seed, layer, step).
std::uint64_t stream_key(std::uint64_t seed, std::string_view name, std::int64_t step);

/// Channel-axis concatenation, `a` first.
Var concat_channels(Var a, Var b);

Var add(Var a, Var b);
Var scale(Var x, double factor);
Var sum(Var x);
/// (B, C, H, W) -> (B): mean over everything but the batch axis.
Var spatial_mean(Var x);

enum class LossKind {
  L1,       ///< mean |a - b|
  Squared,  ///< mean (a - b)^2
  Log,      ///< binary cross-entropy of raw scores `a` against targets `b` in [0, 1]
};

Var scalar_loss(Var a, Var b, LossKind kind);

/// log(1 + exp(z)) without overflow; -log(sigmoid(s)) == softplus(-s).
double softplus(double z);

struct ResidualWeights {
  Var conv0, gain0, bias0;
  Var conv1, gain1, bias1;
};

/// x + IN(conv(relu(IN(conv(x))))) with 3x3 stride-1 convolutions.
Var residual_block(Var x, const ResidualWeights& w, double eps = 1e-5);

}  // namespace sketchpair
