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

#include "sketchpair/encoder.hpp"

#include <cmath>
#include <json.hpp>

#include "sketchpair/errors.hpp"
#include "sketchpair/ops.hpp"

namespace sketchpair {
namespace {

void require_finite(const Var& v, const char* term) {
  if (!std::isfinite(v.value()[0])) throw NumericError(term);
}

// Salts that keep the dropout masks of the two applications of each generator apart.
constexpr std::uint64_t kSaltForward = 1;
constexpr std::uint64_t kSaltReconstruct = 2;

}  // namespace

EncoderQuartet EncoderQuartet::build(std::string_view generator_arch, std::string_view discriminator_arch,
                                     int image_size, std::uint64_t seed, const NetworkOptions& options) {
  return EncoderQuartet{
      Network::build("G", NetworkSpec::generator(generator_arch, 3, image_size), Role::Generator, seed, options),
      Network::build("F", NetworkSpec::generator(generator_arch, 3, image_size), Role::Generator, seed, options),
      Network::build("D_X", NetworkSpec::discriminator(discriminator_arch, 3, image_size), Role::Discriminator, seed,
                     options),
      Network::build("D_Y", NetworkSpec::discriminator(discriminator_arch, 3, image_size), Role::Discriminator, seed,
                     options),
  };
}

ParameterList EncoderQuartet::generator_parameters() {
  ParameterList out = G.parameters();
  for (Parameter* p : F.parameters()) out.push_back(p);
  return out;
}

ParameterList EncoderQuartet::discriminator_parameters() {
  ParameterList out = DX.parameters();
  for (Parameter* p : DY.parameters()) out.push_back(p);
  return out;
}

std::string to_log_line(const EncoderStepReport& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["loss_gan_G"] = r.loss_gan_G;
  j["loss_gan_F"] = r.loss_gan_F;
  j["loss_cyc"] = r.loss_cyc;
  j["loss_D_X"] = r.loss_D_X;
  j["loss_D_Y"] = r.loss_D_Y;
  j["total_generator"] = r.total_generator;
  j["lr"] = r.current_lr;
  return j.dump();
}

Var cycle_loss(Network& G, Network& F, Var x, Var y, const ForwardContext& ctx) {
  Var rec_x = F.forward(*x.graph, G.forward(*x.graph, x, ctx.with_salt(kSaltForward)), ctx.with_salt(kSaltReconstruct));
  Var rec_y = G.forward(*y.graph, F.forward(*y.graph, y, ctx.with_salt(kSaltForward)), ctx.with_salt(kSaltReconstruct));
  return cycle_loss(rec_x, x, rec_y, y);
}

Var cycle_loss(Var reconstructed_x, Var x, Var reconstructed_y, Var y) {
  return add(scalar_loss(reconstructed_x, x, LossKind::L1), scalar_loss(reconstructed_y, y, LossKind::L1));
}

double cycle_loss(Network& G, Network& F, const Tensor& x, const Tensor& y) {
  Graph graph(false);
  return cycle_loss(G, F, graph.constant(x), graph.constant(y), ForwardContext{}).value()[0];
}

Var adversarial_d_loss(Var real_scores, Var fake_scores) {
  Graph& g = *real_scores.graph;
  Var ones = g.constant(Tensor(real_scores.shape(), 1.0f));
  Var zeros = g.constant(Tensor(fake_scores.shape(), 0.0f));
  return add(scalar_loss(real_scores, ones, LossKind::Log), scalar_loss(fake_scores, zeros, LossKind::Log));
}

Var adversarial_g_loss(Var fake_scores, GanLossForm form) {
  Graph& g = *fake_scores.graph;
  if (form == GanLossForm::NonSaturating) {
    return scalar_loss(fake_scores, g.constant(Tensor(fake_scores.shape(), 1.0f)), LossKind::Log);
  }
  // log(1 - sigmoid(s)) = -softplus(s)
  return scale(scalar_loss(fake_scores, g.constant(Tensor(fake_scores.shape(), 0.0f)), LossKind::Log), -1.0);
}

AdversarialValues adversarial_losses(Network& D, const Tensor& real, const Tensor& fake, GanLossForm form) {
  Graph graph(false);
  Var real_scores = D.forward(graph, graph.constant(real), ForwardContext{});
  Var fake_scores = D.forward(graph, graph.constant(fake), ForwardContext{});
  return {adversarial_d_loss(real_scores, fake_scores).value()[0], adversarial_g_loss(fake_scores, form).value()[0]};
}

namespace {

GeneratorObjective complete_objective(Graph& graph, EncoderQuartet& q, Var x, Var y, Var fake_y, Var fake_x,
                                      double lambda_cyc, GanLossForm form, const ForwardContext& ctx) {
  GeneratorObjective o;
  o.fake_y = fake_y;
  o.fake_x = fake_x;
  Var rec_x = q.F.forward(graph, fake_y, ctx.with_salt(kSaltReconstruct));
  Var rec_y = q.G.forward(graph, fake_x, ctx.with_salt(kSaltReconstruct));
  o.cycle = cycle_loss(rec_x, x, rec_y, y);
  o.gan_G = adversarial_g_loss(q.DY.forward(graph, fake_y, ctx.frozen()), form);
  o.gan_F = adversarial_g_loss(q.DX.forward(graph, fake_x, ctx.frozen()), form);
  o.total = add(add(o.gan_G, o.gan_F), scale(o.cycle, lambda_cyc));
  return o;
}

}  // namespace

GeneratorObjective generator_objective(Graph& graph, EncoderQuartet& q, Var x, Var y, double lambda_cyc,
                                       GanLossForm form, const ForwardContext& ctx) {
  Var fake_y = q.G.forward(graph, x, ctx.with_salt(kSaltForward));
  Var fake_x = q.F.forward(graph, y, ctx.with_salt(kSaltForward));
  return complete_objective(graph, q, x, y, fake_y, fake_x, lambda_cyc, form, ctx);
}

EncoderTrainer::EncoderTrainer(EncoderQuartet& quartet, EncoderTrainConfig config)
    : q_(quartet), config_(std::move(config)), schedule_(config_.plateau()) {}

EncoderStepReport EncoderTrainer::step(const Tensor& x, const Tensor& y) {
  const ForwardContext ctx{true, config_.seed, step_};
  const double lr = schedule_.lr();

  // Fakes are produced once; the discriminator phase only sees their values.
  Graph gen;
  Var xv = gen.constant(x);
  Var yv = gen.constant(y);
  Var fake_y = q_.G.forward(gen, xv, ctx.with_salt(kSaltForward));
  Var fake_x = q_.F.forward(gen, yv, ctx.with_salt(kSaltForward));

  EncoderStepReport report;
  report.step = step_ + 1;
  report.current_lr = lr;
  {
    Graph dis;
    Var dy = adversarial_d_loss(q_.DY.forward(dis, dis.constant(y), ctx),
                                q_.DY.forward(dis, dis.constant(fake_y.value()), ctx));
    Var dx = adversarial_d_loss(q_.DX.forward(dis, dis.constant(x), ctx),
                                q_.DX.forward(dis, dis.constant(fake_x.value()), ctx));
    require_finite(dx, "loss_D_X");
    require_finite(dy, "loss_D_Y");
    report.loss_D_X = dx.value()[0];
    report.loss_D_Y = dy.value()[0];
    dis.backward(add(dx, dy));
    AdamOptions opt = config_.adam;
    opt.lr = freeze_d_ ? 0.0 : lr;
    const auto params = q_.discriminator_parameters();
    adam_step(params, opt);
  }
  {
    const auto gp = q_.generator_parameters();
    const auto dp = q_.discriminator_parameters();
    after_d_ = {parameter_hash(gp), parameter_hash(dp)};
  }

  const GeneratorObjective o =
      complete_objective(gen, q_, xv, yv, fake_y, fake_x, config_.lambda_cyc, config_.gan_loss, ctx);
  require_finite(o.gan_G, "loss_gan_G");
  require_finite(o.gan_F, "loss_gan_F");
  require_finite(o.cycle, "loss_cyc");
  require_finite(o.total, "total_generator");
  report.loss_gan_G = o.gan_G.value()[0];
  report.loss_gan_F = o.gan_F.value()[0];
  report.loss_cyc = o.cycle.value()[0];
  report.total_generator = o.total.value()[0];
  gen.backward(o.total);
  AdamOptions opt = config_.adam;
  opt.lr = freeze_g_ ? 0.0 : lr;
  const auto params = q_.generator_parameters();
  adam_step(params, opt);

  ++step_;
  schedule_.observe(report.total_generator);
  history_.push_back(report);
  return report;
}

double lr_schedule(std::span<const EncoderStepReport> history, const EncoderTrainConfig& config) {
  std::vector<double> losses;
  losses.reserve(history.size());
  for (const auto& r : history) losses.push_back(r.total_generator);
  return scheduled_lr(losses, config.plateau());
}

Tensor encode(Network& G, const Tensor& image) {
  if (image.rank() == 3) {
    Tensor batch = image.reshaped({1, image.dim(0), image.dim(1), image.dim(2)});
    Tensor out = G.infer(batch);
    return out.reshaped({out.dim(1), out.dim(2), out.dim(3)});
  }
  return G.infer(image);
}

}  // namespace sketchpair
