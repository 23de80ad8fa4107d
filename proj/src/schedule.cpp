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

#include "sketchpair/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "sketchpair/errors.hpp"

namespace sketchpair {

PlateauSchedule::PlateauSchedule(const PlateauOptions& options) : options_(options), lr_(options.initial_lr) {
  if (options.window < 1 || options.patience < 1 || options.decay_factor < 1.0) {
    throw UsageError("plateau schedule: window and patience must be positive and the decay factor at least 1");
  }
}

double PlateauSchedule::observe(double loss) {
  window_sum_ += loss;
  if (++window_count_ < options_.window) return lr_;

  const double mean = window_sum_ / window_count_;
  window_sum_ = 0.0;
  window_count_ = 0;
  if (!std::isnan(best_) && mean <= best_ * (1.0 - options_.threshold)) {
    stale_ = 0;
  } else {
    ++stale_;
  }
  if (std::isnan(best_) || mean < best_) best_ = mean;

  if (stale_ >= options_.patience) {
    stale_ = 0;
    best_ = std::numeric_limits<double>::quiet_NaN();
    const double next = std::max(lr_ / options_.decay_factor, options_.floor);
    if (next < lr_) ++decays_;
    lr_ = std::min(lr_, next);
  }
  return lr_;
}

double scheduled_lr(std::span<const double> losses, const PlateauOptions& options) {
  PlateauSchedule schedule(options);
  for (double loss : losses) schedule.observe(loss);
  return schedule.lr();
}

}  // namespace sketchpair
