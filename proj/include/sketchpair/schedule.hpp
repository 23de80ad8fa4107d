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

#include <limits>
#include <span>

namespace sketchpair {

struct PlateauOptions {
  double initial_lr = 1e-4;
  double decay_factor = 10.0;
  int window = 50;
  int patience = 5;
  double threshold = 0.01;  ///< relative improvement that counts as progress
  double floor = 1e-8;
};

/// Step-decay on plateaus of a monitored loss.
///
/// Losses are averaged over consecutive windows of `window` steps. A window
/// improves when its mean is at least `threshold` (relative) below the best
/// window mean seen since the last decay; the first window after a decay has
/// nothing to improve on and counts as stale. After `patience` consecutive
/// stale windows the learning rate is divided by `decay_factor`, clamped at
/// `floor`, and the count restarts.
class PlateauSchedule {
 public:
  explicit PlateauSchedule(const PlateauOptions& options);

  /// Feeds one step's loss; returns the learning rate for the next step.
  double observe(double loss);
  double lr() const { return lr_; }
  int decays() const { return decays_; }

 private:
  PlateauOptions options_;
  double lr_;
  double window_sum_ = 0.0;
  int window_count_ = 0;
  double best_ = std::numeric_limits<double>::quiet_NaN();
  int stale_ = 0;
  int decays_ = 0;
};

/// Learning rate after replaying `losses` through a fresh schedule.
double scheduled_lr(std::span<const double> losses, const PlateauOptions& options);

}  // namespace sketchpair
