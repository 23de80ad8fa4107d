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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sketchpair/network.hpp"
#include "sketchpair/optim.hpp"
#include "sketchpair/schedule.hpp"

namespace sketchpair {

/// Generator side of the log-likelihood adversarial loss.
enum class GanLossForm {
  NonSaturating,  ///< minimize -log D(G(x))
  Literal,        ///< minimize log(1 - D(G(x))) as written in the minimax objective
};

struct EncoderTrainConfig {
  int batch_size = 4;
  double lambda_cyc = 10.0;
  double lr = 1e-4;
  double lr_decay_factor = 10.0;
  int plateau_window = 50;
  int plateau_patience = 5;
  double plateau_threshold = 0.01;
  double lr_floor = 1e-8;
  std::int64_t max_steps = 100000;
  std::uint64_t seed = 0;
  int image_size = 256;
  GanLossForm gan_loss = GanLossForm::NonSaturating;
  AdamOptions adam;  ///< lr field unused; the schedule owns the learning rate

  PlateauOptions plateau() const {
    return {lr, lr_decay_factor, plateau_window, plateau_patience, plateau_threshold, lr_floor};
  }
};

/// G: image -> sketch, F: sketch -> image, D_X scores images, D_Y scores sketches.
/// Images and sketches are both 3-channel tensors (sketches replicate gray).
struct EncoderQuartet {
  Network G;
  Network F;
  Network DX;
  Network DY;

  static EncoderQuartet build(std::string_view generator_arch, std::string_view discriminator_arch, int image_size,
                              std::uint64_t seed, const NetworkOptions& options = {});

  ParameterList generator_parameters();
  ParameterList discriminator_parameters();
};

struct EncoderStepReport {
  std::int64_t step = 0;
  double loss_gan_G = 0.0;
  double loss_gan_F = 0.0;
  double loss_cyc = 0.0;
  double loss_D_X = 0.0;
  double loss_D_Y = 0.0;
  /// loss_gan_G + loss_gan_F + lambda_cyc * loss_cyc, as minimized by the generator update.
  double total_generator = 0.0;
  double current_lr = 0.0;

  bool operator==(const EncoderStepReport&) const = default;
};

/// One JSON object per line: step, the five loss terms, total_generator, lr.
std::string to_log_line(const EncoderStepReport& report);

/// mean |F(G(x)) - x| + mean |G(F(y)) - y|.
Var cycle_loss(Network& G, Network& F, Var x, Var y, const ForwardContext& ctx);
double cycle_loss(Network& G, Network& F, const Tensor& x, const Tensor& y);
/// The same loss given the reconstructions F(G(x)) and G(F(y)).
Var cycle_loss(Var reconstructed_x, Var x, Var reconstructed_y, Var y);

/// -mean log sigmoid(real) - mean log(1 - sigmoid(fake)) on raw scores.
Var adversarial_d_loss(Var real_scores, Var fake_scores);
Var adversarial_g_loss(Var fake_scores, GanLossForm form);

struct AdversarialValues {
  double d_loss;
  double g_loss;
};
AdversarialValues adversarial_losses(Network& D, const Tensor& real, const Tensor& fake,
                                     GanLossForm form = GanLossForm::NonSaturating);

/// The generator-phase objective for one batch, kept on `graph` so callers can
/// backpropagate through it. Discriminators enter as constants.
struct GeneratorObjective {
  Var gan_G, gan_F, cycle, total;
  Var fake_y, fake_x;
};
GeneratorObjective generator_objective(Graph& graph, EncoderQuartet& q, Var x, Var y, double lambda_cyc,
                                       GanLossForm form, const ForwardContext& ctx);

/// Alternating updates: discriminators first on detached fakes, then G and F.
class EncoderTrainer {
 public:
  EncoderTrainer(EncoderQuartet& quartet, EncoderTrainConfig config);

  /// x: (B, 3, S, S) images, y: (B, 3, S, S) sketches, unpaired.
  /// Throws NumericError naming the first non-finite loss term.
  EncoderStepReport step(const Tensor& x, const Tensor& y);

  const std::vector<EncoderStepReport>& history() const { return history_; }
  double lr() const { return schedule_.lr(); }
  std::int64_t steps_done() const { return step_; }

  /// A frozen group is stepped with learning rate zero.
  void freeze_generators(bool frozen) { freeze_g_ = frozen; }
  void freeze_discriminators(bool frozen) { freeze_d_ = frozen; }

  /// Parameter hashes recorded right after the last discriminator phase.
  std::pair<std::uint64_t, std::uint64_t> hashes_after_d_phase() const { return after_d_; }

 private:
  EncoderQuartet& q_;
  EncoderTrainConfig config_;
  PlateauSchedule schedule_;
  std::vector<EncoderStepReport> history_;
  std::int64_t step_ = 0;
  bool freeze_g_ = false;
  bool freeze_d_ = false;
  std::pair<std::uint64_t, std::uint64_t> after_d_{0, 0};  ///< (generators, discriminators)
};

/// Replays the trainer's schedule over a report history.
double lr_schedule(std::span<const EncoderStepReport> history, const EncoderTrainConfig& config);

/// Image (3, S, S) or batch (B, 3, S, S) to sketch, eval mode.
Tensor encode(Network& G, const Tensor& image);

}  // namespace sketchpair
