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

// Independent reference implementations used by the unit and acceptance
// tests. Everything here is written with plain loops in double precision and
// shares no code with the library beyond the Tensor container.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "sketchpair/autodiff.hpp"
#include "sketchpair/tensor.hpp"

namespace sketchpair::testing {

inline Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(shape);
  for (auto& v : t.data()) v = static_cast<float>(dist(rng));
  return t;
}

/// Uniform values with magnitude in [min_abs, max_abs] and random sign; keeps
/// inputs of piecewise-linear functions away from their kinks.
inline Tensor random_away_from_zero(const Shape& shape, std::mt19937_64& rng, double min_abs = 0.05,
                                    double max_abs = 1.0) {
  std::uniform_real_distribution<double> mag(min_abs, max_abs);
  std::bernoulli_distribution sign(0.5);
  Tensor t(shape);
  for (auto& v : t.data()) v = static_cast<float>(sign(rng) ? mag(rng) : -mag(rng));
  return t;
}

// ---------------------------------------------------------------------------
// Double-precision reference tensors and layers
// ---------------------------------------------------------------------------

struct RefTensor {
  Shape shape;
  std::vector<double> v;

  RefTensor() = default;
  explicit RefTensor(Shape s, double fill = 0.0) : shape(std::move(s)), v(static_cast<std::size_t>(numel(shape)), fill) {}

  double& at(std::int64_t b, std::int64_t c, std::int64_t h, std::int64_t w) {
    return v[static_cast<std::size_t>(((b * shape[1] + c) * shape[2] + h) * shape[3] + w)];
  }
  double at(std::int64_t b, std::int64_t c, std::int64_t h, std::int64_t w) const {
    return v[static_cast<std::size_t>(((b * shape[1] + c) * shape[2] + h) * shape[3] + w)];
  }
};

inline RefTensor to_ref(const Tensor& t) {
  RefTensor r(t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) r.v[i] = t[i];
  return r;
}

inline Tensor to_tensor(const RefTensor& r) {
  Tensor t(r.shape);
  for (std::size_t i = 0; i < r.v.size(); ++i) t[i] = static_cast<float>(r.v[i]);
  return t;
}

/// Which side of every kink a reference evaluation landed on. Two evaluations
/// with different patterns straddle a point where the function is not smooth.
struct KinkLog {
  std::vector<bool> sides;
  void note(double pre_activation) { sides.push_back(pre_activation > 0.0); }
};

/// out[b,o,i,j] = sum_c,u,v x[b,c,i*s-p+u,j*s-p+v] k[o,c,u,v].
inline RefTensor ref_conv2d(const RefTensor& x, const RefTensor& k, int s, int p) {
  const auto B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  const auto O = k.shape[0], K = k.shape[2];
  const auto Ho = (H + 2 * p - K) / s + 1, Wo = (W + 2 * p - K) / s + 1;
  RefTensor out({B, O, Ho, Wo});
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t o = 0; o < O; ++o)
      for (std::int64_t i = 0; i < Ho; ++i)
        for (std::int64_t j = 0; j < Wo; ++j) {
          double acc = 0.0;
          for (std::int64_t c = 0; c < C; ++c)
            for (std::int64_t u = 0; u < K; ++u)
              for (std::int64_t v = 0; v < K; ++v) {
                const auto y = i * s - p + u, xx = j * s - p + v;
                if (y < 0 || y >= H || xx < 0 || xx >= W) continue;
                acc += x.at(b, c, y, xx) * k.at(o, c, u, v);
              }
          out.at(b, o, i, j) = acc;
        }
  return out;
}

/// Scatter form of the transposed convolution, kernel (Cin, Cout, K, K):
/// every input pixel adds its kernel-weighted footprint to the output.
inline RefTensor ref_conv_transpose2d(const RefTensor& x, const RefTensor& k, int s, int p) {
  const auto B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  const auto O = k.shape[1], K = k.shape[2];
  const auto Ho = (H - 1) * s - 2 * p + K, Wo = (W - 1) * s - 2 * p + K;
  RefTensor out({B, O, Ho, Wo});
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t c = 0; c < C; ++c)
      for (std::int64_t i = 0; i < H; ++i)
        for (std::int64_t j = 0; j < W; ++j)
          for (std::int64_t o = 0; o < O; ++o)
            for (std::int64_t u = 0; u < K; ++u)
              for (std::int64_t v = 0; v < K; ++v) {
                const auto y = i * s - p + u, xx = j * s - p + v;
                if (y < 0 || y >= Ho || xx < 0 || xx >= Wo) continue;
                out.at(b, o, y, xx) += x.at(b, c, i, j) * k.at(c, o, u, v);
              }
  return out;
}

inline RefTensor ref_instance_norm(const RefTensor& x, const RefTensor& gain, const RefTensor& bias,
                                   double eps = 1e-5) {
  const auto B = x.shape[0], C = x.shape[1], H = x.shape[2], W = x.shape[3];
  RefTensor out(x.shape);
  for (std::int64_t b = 0; b < B; ++b)
    for (std::int64_t c = 0; c < C; ++c) {
      double m = 0.0;
      for (std::int64_t i = 0; i < H; ++i)
        for (std::int64_t j = 0; j < W; ++j) m += x.at(b, c, i, j);
      m /= static_cast<double>(H * W);
      double var = 0.0;
      for (std::int64_t i = 0; i < H; ++i)
        for (std::int64_t j = 0; j < W; ++j) var += (x.at(b, c, i, j) - m) * (x.at(b, c, i, j) - m);
      var /= static_cast<double>(H * W);
      const auto ci = static_cast<std::size_t>(c);
      for (std::int64_t i = 0; i < H; ++i)
        for (std::int64_t j = 0; j < W; ++j)
          out.at(b, c, i, j) = gain.v[ci] * (x.at(b, c, i, j) - m) / std::sqrt(var + eps) + bias.v[ci];
    }
  return out;
}

inline RefTensor ref_leaky_relu(const RefTensor& x, double alpha, KinkLog& kinks) {
  RefTensor out(x.shape);
  for (std::size_t i = 0; i < x.v.size(); ++i) {
    kinks.note(x.v[i]);
    out.v[i] = x.v[i] > 0.0 ? x.v[i] : alpha * x.v[i];
  }
  return out;
}

inline RefTensor ref_tanh(const RefTensor& x) {
  RefTensor out(x.shape);
  for (std::size_t i = 0; i < x.v.size(); ++i) out.v[i] = std::tanh(x.v[i]);
  return out;
}

inline RefTensor ref_multiply(const RefTensor& x, const RefTensor& mask) {
  RefTensor out(x.shape);
  for (std::size_t i = 0; i < x.v.size(); ++i) out.v[i] = x.v[i] * mask.v[i];
  return out;
}

inline RefTensor ref_concat_channels(const RefTensor& a, const RefTensor& b) {
  const auto B = a.shape[0], Ca = a.shape[1], Cb = b.shape[1], H = a.shape[2], W = a.shape[3];
  RefTensor out({B, Ca + Cb, H, W});
  for (std::int64_t n = 0; n < B; ++n)
    for (std::int64_t c = 0; c < Ca + Cb; ++c)
      for (std::int64_t i = 0; i < H; ++i)
        for (std::int64_t j = 0; j < W; ++j) out.at(n, c, i, j) = c < Ca ? a.at(n, c, i, j) : b.at(n, c - Ca, i, j);
  return out;
}

inline RefTensor ref_add(const RefTensor& a, const RefTensor& b) {
  RefTensor out(a.shape);
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] + b.v[i];
  return out;
}

inline RefTensor ref_scale(const RefTensor& a, double f) {
  RefTensor out(a.shape);
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[i] = a.v[i] * f;
  return out;
}

inline RefTensor ref_sum(const RefTensor& a) {
  RefTensor out({1});
  for (double v : a.v) out.v[0] += v;
  return out;
}

inline RefTensor ref_spatial_mean(const RefTensor& a) {
  const auto B = a.shape[0];
  const auto per = static_cast<std::size_t>(numel(a.shape) / B);
  RefTensor out({B});
  for (std::int64_t b = 0; b < B; ++b) {
    for (std::size_t i = 0; i < per; ++i) out.v[static_cast<std::size_t>(b)] += a.v[b * per + i];
    out.v[static_cast<std::size_t>(b)] /= static_cast<double>(per);
  }
  return out;
}

inline RefTensor ref_mean_abs(const RefTensor& a, const RefTensor& b, KinkLog& kinks) {
  RefTensor out({1});
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    kinks.note(a.v[i] - b.v[i]);
    out.v[0] += std::fabs(a.v[i] - b.v[i]);
  }
  out.v[0] /= static_cast<double>(a.v.size());
  return out;
}

inline RefTensor ref_mean_square(const RefTensor& a, const RefTensor& b) {
  RefTensor out({1});
  for (std::size_t i = 0; i < a.v.size(); ++i) out.v[0] += (a.v[i] - b.v[i]) * (a.v[i] - b.v[i]);
  out.v[0] /= static_cast<double>(a.v.size());
  return out;
}

/// Textbook sigmoid cross-entropy of scores a against targets t.
inline RefTensor ref_log_loss(const RefTensor& a, const RefTensor& t) {
  RefTensor out({1});
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    const long double p = 1.0L / (1.0L + std::exp(-static_cast<long double>(a.v[i])));
    out.v[0] += static_cast<double>(-(t.v[i] * std::log(p) + (1.0L - t.v[i]) * std::log(1.0L - p)));
  }
  out.v[0] /= static_cast<double>(a.v.size());
  return out;
}

/// x + IN(conv(relu(IN(conv(x))))), 3x3 stride-1 pad-1 convolutions.
inline RefTensor ref_residual_block(const std::vector<RefTensor>& in, KinkLog& kinks) {
  RefTensor h = ref_instance_norm(ref_conv2d(in[0], in[1], 1, 1), in[2], in[3]);
  h = ref_leaky_relu(h, 0.0, kinks);
  h = ref_instance_norm(ref_conv2d(h, in[4], 1, 1), in[5], in[6]);
  return ref_add(in[0], h);
}

// Float front-ends for forward comparisons.
inline Tensor conv2d_loop(const Tensor& x, const Tensor& k, int s, int p) {
  return to_tensor(ref_conv2d(to_ref(x), to_ref(k), s, p));
}
inline Tensor conv_transpose2d_scatter(const Tensor& x, const Tensor& k, int s, int p) {
  return to_tensor(ref_conv_transpose2d(to_ref(x), to_ref(k), s, p));
}
inline Tensor instance_norm_loop(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  return to_tensor(ref_instance_norm(to_ref(x), to_ref(gain), to_ref(bias), eps));
}

// ---------------------------------------------------------------------------
// Loss oracles on score tensors
// ---------------------------------------------------------------------------

inline double mean_abs_loop(const Tensor& a, const Tensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(static_cast<double>(a[i]) - b[i]);
  return acc / static_cast<double>(a.size());
}

inline double mean_square_to_loop(const Tensor& scores, double target) {
  double acc = 0.0;
  for (float s : scores.data()) acc += (s - target) * (s - target);
  return acc / static_cast<double>(scores.size());
}

/// Textbook sigmoid cross-entropy against a constant target, in long double.
inline double log_loss_loop(const Tensor& scores, double target) {
  long double acc = 0.0L;
  for (float s : scores.data()) {
    const long double p = 1.0L / (1.0L + std::exp(-static_cast<long double>(s)));
    acc += -(target * std::log(p) + (1.0L - target) * std::log(1.0L - p));
  }
  return static_cast<double>(acc / scores.size());
}

/// log(1 - sigmoid(s)), averaged: the literal minimax generator objective.
inline double log_one_minus_sigmoid_loop(const Tensor& scores) {
  long double acc = 0.0L;
  for (float s : scores.data()) acc += std::log(1.0L - 1.0L / (1.0L + std::exp(-static_cast<long double>(s))));
  return static_cast<double>(acc / scores.size());
}

// ---------------------------------------------------------------------------
// Central finite differences
// ---------------------------------------------------------------------------

/// Builds the operation under test from graph leaves bound to the inputs.
using OpBuilder = std::function<Var(Graph&, const std::vector<Var>&)>;
/// The same function written independently in double precision.
using Reference = std::function<RefTensor(const std::vector<RefTensor>&, KinkLog&)>;

struct GradCheck {
  double max_rel_error = 0.0;      ///< over every checked gradient entry, see `relative_error`
  double max_strict_error = 0.0;   ///< |a - n| / max(|a|, |n|) with no scale floor, for reporting
  double max_forward_error = 0.0;  ///< library output vs reference, relative to max(1, |reference|)
  std::size_t checked = 0;
  std::size_t straddled = 0;  ///< entries skipped because the stencil crossed a kink
  std::string worst;
};

/// |a - n| / max(|a|, |n|, floor). Entries that are both below `resolution`
/// compare as equal: there the difference quotient carries no significant
/// digits.
inline double relative_error(double a, double n, double resolution = 1e-9, double floor = 0.0) {
  const double scale = std::max(std::fabs(a), std::fabs(n));
  return scale < resolution ? 0.0 : std::fabs(a - n) / std::max(scale, floor);
}

/// Gradients are held in 32-bit floats, so every entry carries rounding of
/// about 1e-7 of the largest entry it was accumulated next to. Entries more
/// than three orders of magnitude below an input's largest gradient entry are
/// therefore measured against that thousandth rather than against themselves.
constexpr double kGradientScaleFloor = 1e-3;

/// Magnitude below which a central difference with step h cannot resolve a
/// derivative to three significant digits: rounding in evaluating
/// L = sum(w * y) perturbs each sample by about eps * sum|w * y|, so the
/// five-point quotient (weights summing to 18/12) carries an absolute error
/// near 1.5 * eps * sum|w * y| / h.
inline double difference_resolution(double sum_abs_terms, double h) {
  constexpr double kRoundingUnits = 12.0;  // ulps per evaluated term, times the stencil weight
  return 1e3 * kRoundingUnits * std::numeric_limits<double>::epsilon() * std::max(1.0, sum_abs_terms) / h;
}

/// Checks the reverse-mode gradient of L = sum(w * op(inputs)), w random, for
/// up to `max_per_input` entries of every input against central differences
/// of the reference with step h, evaluated and accumulated in 64-bit.
/// Entries whose stencil crosses a kink of the reference are skipped. The
/// reference must agree with the library forward at the unperturbed inputs,
/// which `max_forward_error` reports.
inline GradCheck check_gradients(const OpBuilder& build, const Reference& reference, const std::vector<Tensor>& inputs,
                                 std::uint64_t seed, double h = 1e-3, std::size_t max_per_input = 48) {
  std::mt19937_64 rng(seed);
  std::vector<Parameter> params;
  params.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) params.emplace_back("input" + std::to_string(i), inputs[i]);

  GradCheck result;
  Tensor weights;
  {
    Graph g;
    std::vector<Var> leaves;
    for (auto& p : params) leaves.push_back(g.param(p));
    Var y = build(g, leaves);
    weights = random_tensor(y.shape(), rng);
    double value = 0.0;
    for (std::size_t i = 0; i < y.value().size(); ++i) value += static_cast<double>(weights[i]) * y.value()[i];
    Var probe = g.record("probe", Tensor::scalar(static_cast<float>(value)), {y},
                         [y, &weights](Graph& gr, const Tensor& d) {
                           Tensor grad(weights.shape());
                           for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = weights[i] * d[0];
                           gr.accumulate(y, grad);
                         });
    g.backward(probe);

    KinkLog unused;
    std::vector<RefTensor> base;
    for (const auto& t : inputs) base.push_back(to_ref(t));
    const RefTensor expected = reference(base, unused);
    double scale = 1.0;
    for (double v : expected.v) scale = std::max(scale, std::fabs(v));
    for (std::size_t i = 0; i < expected.v.size(); ++i) {
      result.max_forward_error =
          std::max(result.max_forward_error, std::fabs(expected.v[i] - y.value()[i]) / scale);
    }
  }

  std::vector<RefTensor> point;
  for (const auto& t : inputs) point.push_back(to_ref(t));
  double sum_abs_terms = 0.0;
  auto evaluate = [&](KinkLog& kinks) {
    const RefTensor y = reference(point, kinks);
    double value = 0.0;
    sum_abs_terms = 0.0;
    for (std::size_t i = 0; i < y.v.size(); ++i) {
      value += static_cast<double>(weights[i]) * y.v[i];
      sum_abs_terms += std::fabs(static_cast<double>(weights[i]) * y.v[i]);
    }
    return value;
  };
  KinkLog base_kinks;
  evaluate(base_kinks);
  const double resolution = difference_resolution(sum_abs_terms, h);

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const Tensor analytic = params[pi].grad.empty() ? Tensor(inputs[pi].shape()) : params[pi].grad;
    double largest = 0.0;
    for (float v : analytic.data()) largest = std::max(largest, std::fabs(static_cast<double>(v)));
    const double floor = kGradientScaleFloor * largest;
    std::vector<std::size_t> elements(inputs[pi].size());
    for (std::size_t i = 0; i < elements.size(); ++i) elements[i] = i;
    if (elements.size() > max_per_input) {
      std::shuffle(elements.begin(), elements.end(), rng);
      elements.resize(max_per_input);
    }
    for (std::size_t e : elements) {
      double& x = point[pi].v[e];
      const double original = x;
      // Five-point central difference: its O(h^4) truncation error stays
      // below the tolerance even where normalization makes the curvature
      // large next to a small derivative.
      double f[4];
      bool straddles = false;
      const double offsets[4] = {2.0 * h, h, -h, -2.0 * h};
      for (int k = 0; k < 4; ++k) {
        KinkLog kinks;
        x = original + offsets[k];
        f[k] = evaluate(kinks);
        straddles = straddles || kinks.sides != base_kinks.sides;
      }
      x = original;
      if (straddles) {
        ++result.straddled;
        continue;
      }
      const double numeric = (-f[0] + 8.0 * f[1] - 8.0 * f[2] + f[3]) / (12.0 * h);
      const double rel = relative_error(analytic[e], numeric, resolution, floor);
      result.max_strict_error = std::max(result.max_strict_error, relative_error(analytic[e], numeric, resolution));
      ++result.checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst = "input " + std::to_string(pi) + " entry " + std::to_string(e) + ": analytic " +
                       std::to_string(analytic[e]) + " numeric " + std::to_string(numeric);
      }
    }
  }
  return result;
}

}  // namespace sketchpair::testing
