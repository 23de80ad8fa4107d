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
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sketchpair/network.hpp"
#include "sketchpair/optim.hpp"
#include "sketchpair/schedule.hpp"

namespace sketchpair {

/// Score targets of the least-squares objective.
enum class LsganTargets {
  Standard,  ///< real -> 1, fake -> 0
  Literal,   ///< real -> 0, fake -> 1, the orientation of the printed objective
};

enum class LabelEncoding {
  Scalar,  ///< one plane holding label / (classes - 1)
  OneHot,  ///< one plane per class
};

enum class DiscriminatorInput {
  SketchLabelImage,  ///< (sketch, label planes, candidate image)
  LabelImage,        ///< (label planes, candidate image)
};

struct DecoderTrainConfig {
  int batch_size = 4;
  double lambda_l1 = 100.0;
  double lr = 1e-6;
  int num_classes = 256;
  std::uint64_t seed = 0;
  int image_size = 256;
  std::int64_t max_steps = 100000;
  LsganTargets targets = LsganTargets::Standard;
  LabelEncoding label_encoding = LabelEncoding::Scalar;
  DiscriminatorInput disc_input = DiscriminatorInput::SketchLabelImage;
  double lr_decay_factor = 10.0;
  int plateau_window = 50;
  int plateau_patience = 5;
  double plateau_threshold = 0.01;
  double lr_floor = 1e-8;
  AdamOptions adam;

  PlateauOptions plateau() const {
    return {lr, lr_decay_factor, plateau_window, plateau_patience, plateau_threshold, lr_floor};
  }
};

inline constexpr int kSketchChannels = 3;
inline constexpr int kImageChannels = 3;

int label_channels(LabelEncoding encoding, int num_classes);
int generator_input_channels(const DecoderTrainConfig& config);
int discriminator_input_channels(const DecoderTrainConfig& config);

/// (label_channels, H, W) constant planes for one label. Throws UsageError
/// naming the id and class count when the label is out of range.
Tensor broadcast_label(int label_id, int num_classes, int height, int width,
                       LabelEncoding encoding = LabelEncoding::Scalar);

struct ConditionalInputs {
  Tensor g_in;       ///< (B, 3 + L, H, W): sketch then label planes
  Tensor condition;  ///< what precedes the candidate image in the discriminator input
  Tensor d_real_in;  ///< condition followed by the real image
};

/// sketch and image are (B, 3, H, W); one label per batch item.
ConditionalInputs conditional_inputs(const Tensor& sketch, const Tensor& image, std::span<const int> labels,
                                     const DecoderTrainConfig& config);

/// Discriminator input for a candidate image under a prepared condition.
Tensor discriminator_input(const Tensor& condition, const Tensor& candidate);

struct DecoderPair {
  Network G;
  Network D;

  static DecoderPair build(std::string_view generator_arch, std::string_view discriminator_arch,
                           const DecoderTrainConfig& config, std::uint64_t seed, const NetworkOptions& options = {});
};

/// mean (D(real) - t_real)^2 + mean (D(fake) - t_fake)^2.
Var lsgan_d_loss(Var real_scores, Var fake_scores, LsganTargets targets = LsganTargets::Standard);

struct DecoderGeneratorLoss {
  Var total, adv, l1;
};

/// adv = mean (D(fake) - t_real)^2, l1 = mean |real - fake|, total = adv + lambda * l1.
DecoderGeneratorLoss lsgan_g_loss(Var fake_scores, Var fake_image, Var real_image, double lambda_l1,
                                  LsganTargets targets = LsganTargets::Standard);

double lsgan_d_loss(Network& D, const Tensor& real_in, const Tensor& fake_in,
                    LsganTargets targets = LsganTargets::Standard);

struct DecoderStepReport {
  std::int64_t step = 0;
  double loss_adv = 0.0;
  double loss_l1 = 0.0;
  double total_generator = 0.0;
  double loss_D = 0.0;
  double current_lr = 0.0;

  bool operator==(const DecoderStepReport&) const = default;
};

std::string to_log_line(const DecoderStepReport& report);

class DecoderTrainer {
 public:
  DecoderTrainer(DecoderPair& pair, DecoderTrainConfig config);

  /// Discriminator update on the detached generation, then generator update.
  DecoderStepReport step(const Tensor& sketch, const Tensor& image, std::span<const int> labels);

  const std::vector<DecoderStepReport>& history() const { return history_; }
  double lr() const { return schedule_.lr(); }

  void freeze_generator(bool frozen) { freeze_g_ = frozen; }
  void freeze_discriminator(bool frozen) { freeze_d_ = frozen; }

  /// Parameter hashes recorded right after the last discriminator phase.
  std::pair<std::uint64_t, std::uint64_t> hashes_after_d_phase() const { return after_d_; }

 private:
  DecoderPair& pair_;
  DecoderTrainConfig config_;
  PlateauSchedule schedule_;
  std::vector<DecoderStepReport> history_;
  std::int64_t step_ = 0;
  bool freeze_g_ = false;
  bool freeze_d_ = false;
  std::pair<std::uint64_t, std::uint64_t> after_d_{0, 0};  ///< (generator, discriminator)
};

/// Sketch (3, H, W) and label to an image (3, H, W), eval mode.
Tensor translate(Network& G, const Tensor& sketch, int label_id, int num_classes,
                 LabelEncoding encoding = LabelEncoding::Scalar);

}  // namespace sketchpair
