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

#include <cblas.h>

#include <vector>

#include "sketchpair/errors.hpp"
#include "sketchpair/ops.hpp"

namespace sketchpair::kernels {
namespace {

// Results must not depend on thread scheduling.
[[maybe_unused]] const bool kSingleThreadedBlas = [] {
  openblas_set_num_threads(1);
  return true;
}();

struct Geometry {
  std::int64_t batch, in_c, in_h, in_w;
  std::int64_t out_c, out_h, out_w;
  std::int64_t k;
  int stride, pad;

  std::int64_t rows() const { return in_c * k * k; }
  std::int64_t cols() const { return out_h * out_w; }
};

std::int64_t output_extent(std::int64_t in, std::int64_t k, int stride, int pad, const char* axis) {
  const std::int64_t span = in + 2 * pad - k;
  if (span < 0) {
    throw ShapeError(std::string("conv: ") + axis + " extent " + std::to_string(in) + " smaller than kernel " +
                     std::to_string(k) + " with padding " + std::to_string(pad));
  }
  if (span % stride != 0) {
    throw ShapeError(std::string("conv: non-integral output ") + axis + " for extent " + std::to_string(in) +
                     ", kernel " + std::to_string(k) + ", stride " + std::to_string(stride) + ", pad " +
                     std::to_string(pad));
  }
  return span / stride + 1;
}

Geometry make_geometry(const Shape& x, const Shape& kernel, int stride, int pad) {
  if (x.size() != 4) throw ShapeError("conv: input must be rank 4, got " + shape_str(x));
  if (kernel.size() != 4 || kernel[2] != kernel[3]) {
    throw ShapeError("conv: kernel must be (Cout, Cin, k, k), got " + shape_str(kernel));
  }
  if (x[1] != kernel[1]) {
    throw ShapeError("conv: input " + shape_str(x) + " has " + std::to_string(x[1]) + " channels but kernel " +
                     shape_str(kernel) + " expects " + std::to_string(kernel[1]));
  }
  if (stride < 1 || pad < 0) throw ShapeError("conv: invalid stride/pad");
  Geometry g{};
  g.batch = x[0];
  g.in_c = x[1];
  g.in_h = x[2];
  g.in_w = x[3];
  g.out_c = kernel[0];
  g.k = kernel[2];
  g.stride = stride;
  g.pad = pad;
  g.out_h = output_extent(g.in_h, g.k, stride, pad, "height");
  g.out_w = output_extent(g.in_w, g.k, stride, pad, "width");
  return g;
}

void im2col(const Geometry& g, const float* x, double* col) {
  const std::int64_t cols = g.cols();
  for (std::int64_t c = 0; c < g.in_c; ++c) {
    const float* plane = x + c * g.in_h * g.in_w;
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        double* row = col + ((c * g.k + ky) * g.k + kx) * cols;
        for (std::int64_t oy = 0; oy < g.out_h; ++oy) {
          const std::int64_t iy = oy * g.stride - g.pad + ky;
          double* dst = row + oy * g.out_w;
          if (iy < 0 || iy >= g.in_h) {
            std::fill(dst, dst + g.out_w, 0.0);
            continue;
          }
          const float* src = plane + iy * g.in_w;
          for (std::int64_t ox = 0; ox < g.out_w; ++ox) {
            const std::int64_t ix = ox * g.stride - g.pad + kx;
            dst[ox] = (ix >= 0 && ix < g.in_w) ? static_cast<double>(src[ix]) : 0.0;
          }
        }
      }
    }
  }
}

void col2im(const Geometry& g, const double* col, double* x) {
  const std::int64_t cols = g.cols();
  for (std::int64_t c = 0; c < g.in_c; ++c) {
    double* plane = x + c * g.in_h * g.in_w;
    for (std::int64_t ky = 0; ky < g.k; ++ky) {
      for (std::int64_t kx = 0; kx < g.k; ++kx) {
        const double* row = col + ((c * g.k + ky) * g.k + kx) * cols;
        for (std::int64_t oy = 0; oy < g.out_h; ++oy) {
          const std::int64_t iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.in_h) continue;
          const double* src = row + oy * g.out_w;
          double* dst = plane + iy * g.in_w;
          for (std::int64_t ox = 0; ox < g.out_w; ++ox) {
            const std::int64_t ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < g.in_w) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

std::vector<double> widen(const Tensor& t) { return std::vector<double>(t.data().begin(), t.data().end()); }

}  // namespace

Tensor conv2d_forward(const Tensor& x, const Tensor& kernel, int stride, int pad) {
  const Geometry g = make_geometry(x.shape(), kernel.shape(), stride, pad);
  Tensor out({g.batch, g.out_c, g.out_h, g.out_w});
  const std::vector<double> w = widen(kernel);
  std::vector<double> col(static_cast<std::size_t>(g.rows() * g.cols()));
  std::vector<double> acc(static_cast<std::size_t>(g.out_c * g.cols()));
  for (std::int64_t b = 0; b < g.batch; ++b) {
    im2col(g, x.raw() + b * g.in_c * g.in_h * g.in_w, col.data());
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, g.out_c, g.cols(), g.rows(), 1.0, w.data(), g.rows(),
                col.data(), g.cols(), 0.0, acc.data(), g.cols());
    float* dst = out.raw() + b * g.out_c * g.cols();
    for (std::size_t i = 0; i < acc.size(); ++i) dst[i] = static_cast<float>(acc[i]);
  }
  return out;
}

Tensor conv2d_backward_input(const Tensor& out_grad, const Tensor& kernel, const Shape& input_shape, int stride,
                             int pad) {
  const Geometry g = make_geometry(input_shape, kernel.shape(), stride, pad);
  const Shape expected{g.batch, g.out_c, g.out_h, g.out_w};
  if (out_grad.shape() != expected) {
    throw ShapeError("conv: output gradient " + shape_str(out_grad.shape()) + " does not match " +
                     shape_str(expected));
  }
  Tensor dx(input_shape);
  const std::vector<double> w = widen(kernel);
  std::vector<double> gout(static_cast<std::size_t>(g.out_c * g.cols()));
  std::vector<double> dcol(static_cast<std::size_t>(g.rows() * g.cols()));
  std::vector<double> plane(static_cast<std::size_t>(g.in_c * g.in_h * g.in_w));
  for (std::int64_t b = 0; b < g.batch; ++b) {
    const float* src = out_grad.raw() + b * g.out_c * g.cols();
    std::copy(src, src + gout.size(), gout.begin());
    cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, g.rows(), g.cols(), g.out_c, 1.0, w.data(), g.rows(),
                gout.data(), g.cols(), 0.0, dcol.data(), g.cols());
    std::fill(plane.begin(), plane.end(), 0.0);
    col2im(g, dcol.data(), plane.data());
    float* dst = dx.raw() + b * static_cast<std::int64_t>(plane.size());
    for (std::size_t i = 0; i < plane.size(); ++i) dst[i] = static_cast<float>(plane[i]);
  }
  return dx;
}

Tensor conv2d_backward_kernel(const Tensor& x, const Tensor& out_grad, const Shape& kernel_shape, int stride,
                              int pad) {
  const Geometry g = make_geometry(x.shape(), kernel_shape, stride, pad);
  const Shape expected{g.batch, g.out_c, g.out_h, g.out_w};
  if (out_grad.shape() != expected) {
    throw ShapeError("conv: output gradient " + shape_str(out_grad.shape()) + " does not match " +
                     shape_str(expected));
  }
  std::vector<double> col(static_cast<std::size_t>(g.rows() * g.cols()));
  std::vector<double> gout(static_cast<std::size_t>(g.out_c * g.cols()));
  std::vector<double> dw(static_cast<std::size_t>(g.out_c * g.rows()), 0.0);
  for (std::int64_t b = 0; b < g.batch; ++b) {
    im2col(g, x.raw() + b * g.in_c * g.in_h * g.in_w, col.data());
    const float* src = out_grad.raw() + b * g.out_c * g.cols();
    std::copy(src, src + gout.size(), gout.begin());
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, g.out_c, g.rows(), g.cols(), 1.0, gout.data(), g.cols(),
                col.data(), g.cols(), 1.0, dw.data(), g.rows());
  }
  Tensor out(kernel_shape);
  for (std::size_t i = 0; i < dw.size(); ++i) out[i] = static_cast<float>(dw[i]);
  return out;
}

}  // namespace sketchpair::kernels
