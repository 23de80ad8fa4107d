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

#include "sketchpair/optim.hpp"

#include <cmath>

#include "sketchpair/errors.hpp"

namespace sketchpair {

void adam_step(std::span<Parameter* const> params, const AdamOptions& options) {
  if (!(options.lr >= 0.0)) throw Error("adam: learning rate must be non-negative");
  for (Parameter* p : params) {
    const Tensor& grad = p->gradient();
    if (p->first_moment.shape() != p->value.shape()) p->first_moment = Tensor(p->value.shape());
    if (p->second_moment.shape() != p->value.shape()) p->second_moment = Tensor(p->value.shape());
    ++p->step;
    const double c1 = 1.0 - std::pow(options.beta1, static_cast<double>(p->step));
    const double c2 = 1.0 - std::pow(options.beta2, static_cast<double>(p->step));
    float* value = p->value.raw();
    float* m = p->first_moment.raw();
    float* v = p->second_moment.raw();
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = grad[i];
      const double mi = options.beta1 * m[i] + (1.0 - options.beta1) * g;
      const double vi = options.beta2 * v[i] + (1.0 - options.beta2) * g * g;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      if (options.lr > 0.0) {
        value[i] = static_cast<float>(value[i] - options.lr * (mi / c1) / (std::sqrt(vi / c2) + options.eps));
      }
    }
    p->zero_grad();
  }
}

void zero_grad(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace sketchpair
