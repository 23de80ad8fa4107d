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

#include "sketchpair/ops.hpp"

#include <cmath>
#include <cstring>

#include "sketchpair/errors.hpp"

namespace sketchpair {
namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Var conv2d(Var x, Var kernel, int stride, int pad) {
  Tensor out = kernels::conv2d_forward(x.value(), kernel.value(), stride, pad);
  return x.graph->record("conv2d", std::move(out), {x, kernel}, [x, kernel, stride, pad](Graph& g, const Tensor& dy) {
    if (g.requires_grad(x)) {
      g.accumulate(x, kernels::conv2d_backward_input(dy, kernel.value(), x.shape(), stride, pad));
    }
    if (g.requires_grad(kernel)) {
      g.accumulate(kernel, kernels::conv2d_backward_kernel(x.value(), dy, kernel.shape(), stride, pad));
    }
  });
}

Var conv_transpose2d(Var x, Var kernel, int stride, int pad) {
  const Shape& xs = x.shape();
  const Shape& ks = kernel.shape();
  if (xs.size() != 4 || ks.size() != 4 || ks[2] != ks[3]) {
    throw ShapeError("conv_transpose: expected rank-4 input and (Cin, Cout, k, k) kernel, got " + shape_str(xs) +
                     " and " + shape_str(ks));
  }
  if (xs[1] != ks[0]) {
    throw ShapeError("conv_transpose: input " + shape_str(xs) + " has " + std::to_string(xs[1]) +
                     " channels but kernel " + shape_str(ks) + " expects " + std::to_string(ks[0]));
  }
  const Shape out_shape{xs[0], ks[1], (xs[2] - 1) * stride - 2 * pad + ks[2], (xs[3] - 1) * stride - 2 * pad + ks[3]};
  if (out_shape[2] < 1 || out_shape[3] < 1) throw ShapeError("conv_transpose: empty output " + shape_str(out_shape));
  Tensor out = kernels::conv2d_backward_input(x.value(), kernel.value(), out_shape, stride, pad);
  return x.graph->record("conv_transpose2d", std::move(out), {x, kernel},
                         [x, kernel, stride, pad](Graph& g, const Tensor& dy) {
                           if (g.requires_grad(x)) g.accumulate(x, kernels::conv2d_forward(dy, kernel.value(), stride, pad));
                           if (g.requires_grad(kernel)) {
                             g.accumulate(kernel,
                                          kernels::conv2d_backward_kernel(dy, x.value(), kernel.shape(), stride, pad));
                           }
                         });
}

Var instance_norm(Var x, Var gain, Var bias, double eps) {
  const Tensor& in = x.value();
  if (in.rank() != 4) throw ShapeError("instance_norm: input must be rank 4, got " + shape_str(in.shape()));
  const auto batch = in.dim(0), channels = in.dim(1), plane = in.dim(2) * in.dim(3);
  if (gain.shape() != Shape{channels} || bias.shape() != Shape{channels}) {
    throw ShapeError("instance_norm: gain/bias must be (" + std::to_string(channels) + "), got " +
                     shape_str(gain.shape()) + " and " + shape_str(bias.shape()));
  }
  if (plane < 1) throw ShapeError("instance_norm: empty spatial plane");

  Tensor out(in.shape());
  // The normalized values are kept in double: the input gradient subtracts
  // nearly equal terms, and float rounding here dominates its error.
  std::vector<double> normalized(in.size());
  std::vector<double> inv_std(static_cast<std::size_t>(batch * channels));
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  for (std::int64_t b = 0; b < batch; ++b) {
    for (std::int64_t c = 0; c < channels; ++c) {
      const std::int64_t base = (b * channels + c) * plane;
      double mu = 0.0;
      for (std::int64_t i = 0; i < plane; ++i) mu += in[base + i];
      mu /= static_cast<double>(plane);
      double var = 0.0;
      for (std::int64_t i = 0; i < plane; ++i) {
        const double d = in[base + i] - mu;
        var += d * d;
      }
      var /= static_cast<double>(plane);
      const double istd = 1.0 / std::sqrt(var + eps);
      inv_std[b * channels + c] = istd;
      for (std::int64_t i = 0; i < plane; ++i) {
        const double xhat = (in[base + i] - mu) * istd;
        normalized[base + i] = xhat;
        out[base + i] = static_cast<float>(gv[c] * xhat + bv[c]);
      }
    }
  }
  return x.graph->record(
      "instance_norm", std::move(out), {x, gain, bias},
      [x, gain, bias, normalized = std::move(normalized), inv_std = std::move(inv_std), batch, channels, plane](
          Graph& g, const Tensor& dy) {
        const Tensor& gv = gain.value();
        Tensor dx(x.shape());
        Tensor dgain(gain.shape());
        Tensor dbias(bias.shape());
        for (std::int64_t c = 0; c < channels; ++c) {
          double sg = 0.0, sb = 0.0;
          for (std::int64_t b = 0; b < batch; ++b) {
            const std::int64_t base = (b * channels + c) * plane;
            double sum_dy = 0.0, sum_dy_xhat = 0.0;
            for (std::int64_t i = 0; i < plane; ++i) {
              sum_dy += dy[base + i];
              sum_dy_xhat += static_cast<double>(dy[base + i]) * normalized[base + i];
            }
            sg += sum_dy_xhat;
            sb += sum_dy;
            const double mean_dy = sum_dy / static_cast<double>(plane);
            const double mean_dy_xhat = sum_dy_xhat / static_cast<double>(plane);
            const double k = gv[c] * inv_std[b * channels + c];
            for (std::int64_t i = 0; i < plane; ++i) {
              dx[base + i] = static_cast<float>(k * (dy[base + i] - mean_dy - normalized[base + i] * mean_dy_xhat));
            }
          }
          dgain[c] = static_cast<float>(sg);
          dbias[c] = static_cast<float>(sb);
        }
        g.accumulate(x, dx);
        g.accumulate(gain, dgain);
        g.accumulate(bias, dbias);
      });
}

Var leaky_relu(Var x, float alpha) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] >= 0.0f ? in[i] : alpha * in[i];
  return x.graph->record("leaky_relu", std::move(out), {x}, [x, alpha](Graph& g, const Tensor& dy) {
    const Tensor& in = x.value();
    Tensor dx(in.shape());
    for (std::size_t i = 0; i < in.size(); ++i) dx[i] = in[i] >= 0.0f ? dy[i] : alpha * dy[i];
    g.accumulate(x, dx);
  });
}

Var tanh(Var x) {
  const Tensor& in = x.value();
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::tanh(in[i]);
  Var result = x.graph->record("tanh", out, {x}, [x, out](Graph& g, const Tensor& dy) {
    Tensor dx(out.shape());
    for (std::size_t i = 0; i < out.size(); ++i) {
      dx[i] = static_cast<float>(dy[i] * (1.0 - static_cast<double>(out[i]) * out[i]));
    }
    g.accumulate(x, dx);
  });
  return result;
}

std::uint64_t stream_key(std::uint64_t seed, std::string_view name, std::int64_t step) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(seed ^ splitmix64(h ^ splitmix64(static_cast<std::uint64_t>(step))));
}

Var dropout(Var x, float rate, bool train, std::uint64_t stream) {
  if (!(rate >= 0.0f && rate < 1.0f)) throw Error("dropout: rate must lie in [0, 1)");
  if (!train || rate == 0.0f) {
    return x.graph->record("dropout", x.value(), {x}, [x](Graph& g, const Tensor& dy) { g.accumulate(x, dy); });
  }
  const Tensor& in = x.value();
  Tensor mask(in.shape());
  const float keep_scale = 1.0f / (1.0f - rate);
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double u = static_cast<double>(splitmix64(stream + i) >> 11) * 0x1.0p-53;
    mask[i] = u >= rate ? keep_scale : 0.0f;
  }
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * mask[i];
  return x.graph->record("dropout", std::move(out), {x}, [x, mask = std::move(mask)](Graph& g, const Tensor& dy) {
    Tensor dx(dy.shape());
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask[i];
    g.accumulate(x, dx);
  });
}

Var concat_channels(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 4 || bv.rank() != 4 || av.dim(0) != bv.dim(0) || av.dim(2) != bv.dim(2) ||
      av.dim(3) != bv.dim(3)) {
    throw ShapeError("concat_channels: " + shape_str(av.shape()) + " and " + shape_str(bv.shape()) +
                     " differ outside the channel axis");
  }
  const auto batch = av.dim(0), ca = av.dim(1), cb = bv.dim(1), plane = av.dim(2) * av.dim(3);
  Tensor out({batch, ca + cb, av.dim(2), av.dim(3)});
  for (std::int64_t n = 0; n < batch; ++n) {
    float* dst = out.raw() + n * (ca + cb) * plane;
    std::memcpy(dst, av.raw() + n * ca * plane, sizeof(float) * ca * plane);
    std::memcpy(dst + ca * plane, bv.raw() + n * cb * plane, sizeof(float) * cb * plane);
  }
  return a.graph->record("concat_channels", std::move(out), {a, b}, [a, b, ca, cb](Graph& g, const Tensor& dy) {
    if (g.requires_grad(a)) g.accumulate(a, slice_channels(dy, 0, ca));
    if (g.requires_grad(b)) g.accumulate(b, slice_channels(dy, ca, ca + cb));
  });
}

Var add(Var a, Var b) {
  require_same_shape("add", a.value(), b.value());
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.graph->record("add", std::move(out), {a, b}, [a, b](Graph& g, const Tensor& dy) {
    g.accumulate(a, dy);
    g.accumulate(b, dy);
  });
}

Var scale(Var x, double factor) {
  Tensor out(x.shape());
  const Tensor& in = x.value();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = static_cast<float>(in[i] * factor);
  return x.graph->record("scale", std::move(out), {x}, [x, factor](Graph& g, const Tensor& dy) {
    Tensor dx(dy.shape());
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = static_cast<float>(dy[i] * factor);
    g.accumulate(x, dx);
  });
}

Var sum(Var x) {
  double acc = 0.0;
  for (float v : x.value().data()) acc += v;
  return x.graph->record("sum", Tensor::scalar(static_cast<float>(acc)), {x}, [x](Graph& g, const Tensor& dy) {
    g.accumulate(x, Tensor(x.shape(), dy[0]));
  });
}

Var spatial_mean(Var x) {
  const Tensor& in = x.value();
  if (in.rank() != 4) throw ShapeError("spatial_mean: input must be rank 4, got " + shape_str(in.shape()));
  const auto batch = in.dim(0);
  const auto item = in.dim(1) * in.dim(2) * in.dim(3);
  Tensor out({batch});
  for (std::int64_t b = 0; b < batch; ++b) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < item; ++i) acc += in[b * item + i];
    out[b] = static_cast<float>(acc / static_cast<double>(item));
  }
  return x.graph->record("spatial_mean", std::move(out), {x}, [x, item](Graph& g, const Tensor& dy) {
    Tensor dx(x.shape());
    for (std::int64_t b = 0; b < dy.dim(0); ++b) {
      const float v = static_cast<float>(dy[b] / static_cast<double>(item));
      std::fill(dx.raw() + b * item, dx.raw() + (b + 1) * item, v);
    }
    g.accumulate(x, dx);
  });
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Var scalar_loss(Var a, Var b, LossKind kind) {
  require_same_shape("scalar_loss", a.value(), b.value());
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.empty()) throw ShapeError("scalar_loss: empty input");
  const double n = static_cast<double>(av.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double x = av[i], t = bv[i];
    switch (kind) {
      case LossKind::L1:
        acc += std::abs(x - t);
        break;
      case LossKind::Squared:
        acc += (x - t) * (x - t);
        break;
      case LossKind::Log:
        acc += t * softplus(-x) + (1.0 - t) * softplus(x);
        break;
    }
  }
  const char* name = kind == LossKind::L1 ? "l1_loss" : kind == LossKind::Squared ? "squared_loss" : "log_loss";
  return a.graph->record(name, Tensor::scalar(static_cast<float>(acc / n)), {a, b},
                         [a, b, kind, n](Graph& g, const Tensor& dy) {
                           const Tensor& av = a.value();
                           const Tensor& bv = b.value();
                           Tensor da(av.shape());
                           Tensor db(bv.shape());
                           const double s = dy[0] / n;
                           for (std::size_t i = 0; i < av.size(); ++i) {
                             const double x = av[i], t = bv[i];
                             double gx = 0.0, gt = 0.0;
                             switch (kind) {
                               case LossKind::L1:
                                 gx = x > t ? 1.0 : (x < t ? -1.0 : 0.0);
                                 gt = -gx;
                                 break;
                               case LossKind::Squared:
                                 gx = 2.0 * (x - t);
                                 gt = -gx;
                                 break;
                               case LossKind::Log:
                                 gx = sigmoid(x) - t;
                                 gt = softplus(-x) - softplus(x);
                                 break;
                             }
                             da[i] = static_cast<float>(s * gx);
                             db[i] = static_cast<float>(s * gt);
                           }
                           if (g.requires_grad(a)) g.accumulate(a, da);
                           if (g.requires_grad(b)) g.accumulate(b, db);
                         });
}

Var residual_block(Var x, const ResidualWeights& w, double eps) {
  const auto channels = x.shape().size() == 4 ? x.shape()[1] : -1;
  for (const Var* k : {&w.conv0, &w.conv1}) {
    if (k->shape() != Shape{channels, channels, 3, 3}) {
      throw ShapeError("residual_block: kernel " + shape_str(k->shape()) + " does not match input " +
                       shape_str(x.shape()));
    }
  }
  Var h = conv2d(x, w.conv0, 1, 1);
  h = instance_norm(h, w.gain0, w.bias0, eps);
  h = leaky_relu(h, 0.0f);
  h = conv2d(h, w.conv1, 1, 1);
  h = instance_norm(h, w.gain1, w.bias1, eps);
  return add(x, h);
}

}  // namespace sketchpair
