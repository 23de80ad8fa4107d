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

#include "sketchpair/decoder.hpp"

#include <cmath>
#include <json.hpp>

#include "sketchpair/errors.hpp"
#include "sketchpair/ops.hpp"

namespace sketchpair {
namespace {

void require_finite(const Var& v, const char* term) {
  if (!std::isfinite(v.value()[0])) throw NumericError(term);
}

void check_label(int label_id, int num_classes) {
  if (num_classes < 1) throw UsageError("class count must be at least 1, got " + std::to_string(num_classes));
  if (label_id < 0 || label_id >= num_classes) {
    throw UsageError("label " + std::to_string(label_id) + " is out of range for " + std::to_string(num_classes) +
                     " classes");
  }
}

Tensor concat_tensors(const Tensor& a, const Tensor& b) {
  Graph g(false);
  return concat_channels(g.constant(a), g.constant(b)).value();
}

std::pair<float, float> targets_of(LsganTargets targets) {
  return targets == LsganTargets::Standard ? std::pair{1.0f, 0.0f} : std::pair{0.0f, 1.0f};
}

}  // namespace

int label_channels(LabelEncoding encoding, int num_classes) {
  return encoding == LabelEncoding::Scalar ? 1 : num_classes;
}

int generator_input_channels(const DecoderTrainConfig& config) {
  return kSketchChannels + label_channels(config.label_encoding, config.num_classes);
}

int discriminator_input_channels(const DecoderTrainConfig& config) {
  const int label = label_channels(config.label_encoding, config.num_classes);
  return config.disc_input == DiscriminatorInput::SketchLabelImage ? kSketchChannels + label + kImageChannels
                                                                    : label + kImageChannels;
}

Tensor broadcast_label(int label_id, int num_classes, int height, int width, LabelEncoding encoding) {
  check_label(label_id, num_classes);
  if (encoding == LabelEncoding::Scalar) {
    const float value = static_cast<float>(static_cast<double>(label_id) / std::max(1, num_classes - 1));
    return Tensor({1, height, width}, value);
  }
  Tensor out({num_classes, height, width});
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  std::fill(out.raw() + label_id * plane, out.raw() + (label_id + 1) * plane, 1.0f);
  return out;
}

ConditionalInputs conditional_inputs(const Tensor& sketch, const Tensor& image, std::span<const int> labels,
                                     const DecoderTrainConfig& config) {
  if (sketch.rank() != 4 || image.rank() != 4 || sketch.dim(0) != image.dim(0) || sketch.dim(2) != image.dim(2) ||
      sketch.dim(3) != image.dim(3)) {
    throw ShapeError("conditional_inputs: sketch " + shape_str(sketch.shape()) + " and image " +
                     shape_str(image.shape()) + " are not aligned");
  }
  if (sketch.dim(1) != kSketchChannels || image.dim(1) != kImageChannels) {
    throw ShapeError("conditional_inputs: expected " + std::to_string(kSketchChannels) + "-channel sketches and " +
                     std::to_string(kImageChannels) + "-channel images, got " + shape_str(sketch.shape()) + " and " +
                     shape_str(image.shape()));
  }
  if (static_cast<std::int64_t>(labels.size()) != sketch.dim(0)) {
    throw ShapeError("conditional_inputs: " + std::to_string(labels.size()) + " labels for a batch of " +
                     std::to_string(sketch.dim(0)));
  }
  const int h = static_cast<int>(sketch.dim(2)), w = static_cast<int>(sketch.dim(3));
  std::vector<Tensor> planes;
  for (int label : labels) planes.push_back(broadcast_label(label, config.num_classes, h, w, config.label_encoding));
  const Tensor label_planes = stack(planes);

  ConditionalInputs out;
  out.g_in = concat_tensors(sketch, label_planes);
  out.condition = config.disc_input == DiscriminatorInput::SketchLabelImage ? out.g_in : label_planes;
  out.d_real_in = discriminator_input(out.condition, image);
  return out;
}

Tensor discriminator_input(const Tensor& condition, const Tensor& candidate) {
  return concat_tensors(condition, candidate);
}

DecoderPair DecoderPair::build(std::string_view generator_arch, std::string_view discriminator_arch,
                               const DecoderTrainConfig& config, std::uint64_t seed, const NetworkOptions& options) {
  return DecoderPair{
      Network::build("G_dec", NetworkSpec::generator(generator_arch, generator_input_channels(config), config.image_size),
                     Role::Generator, seed, options),
      Network::build("D_dec",
                     NetworkSpec::discriminator(discriminator_arch, discriminator_input_channels(config),
                                                config.image_size),
                     Role::Discriminator, seed, options),
  };
}

Var lsgan_d_loss(Var real_scores, Var fake_scores, LsganTargets targets) {
  const auto [t_real, t_fake] = targets_of(targets);
  Graph& g = *real_scores.graph;
  return add(scalar_loss(real_scores, g.constant(Tensor(real_scores.shape(), t_real)), LossKind::Squared),
             scalar_loss(fake_scores, g.constant(Tensor(fake_scores.shape(), t_fake)), LossKind::Squared));
}

DecoderGeneratorLoss lsgan_g_loss(Var fake_scores, Var fake_image, Var real_image, double lambda_l1,
                                  LsganTargets targets) {
  const float t_real = targets_of(targets).first;
  Graph& g = *fake_scores.graph;
  DecoderGeneratorLoss out;
  out.adv = scalar_loss(fake_scores, g.constant(Tensor(fake_scores.shape(), t_real)), LossKind::Squared);
  out.l1 = scalar_loss(real_image, fake_image, LossKind::L1);
  out.total = add(out.adv, scale(out.l1, lambda_l1));
  return out;
}

double lsgan_d_loss(Network& D, const Tensor& real_in, const Tensor& fake_in, LsganTargets targets) {
  Graph g(false);
  return lsgan_d_loss(D.forward(g, g.constant(real_in), {}), D.forward(g, g.constant(fake_in), {}), targets)
      .value()[0];
}

std::string to_log_line(const DecoderStepReport& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["loss_adv"] = r.loss_adv;
  j["loss_l1"] = r.loss_l1;
  j["total_generator"] = r.total_generator;
  j["loss_D"] = r.loss_D;
  j["lr"] = r.current_lr;
  return j.dump();
}

DecoderTrainer::DecoderTrainer(DecoderPair& pair, DecoderTrainConfig config)
    : pair_(pair), config_(std::move(config)), schedule_(config_.plateau()) {}

DecoderStepReport DecoderTrainer::step(const Tensor& sketch, const Tensor& image, std::span<const int> labels) {
  const ForwardContext ctx{true, config_.seed, step_};
  const double lr = schedule_.lr();
  const ConditionalInputs in = conditional_inputs(sketch, image, labels, config_);

  Graph gen;
  Var fake = pair_.G.forward(gen, gen.constant(in.g_in), ctx);

  DecoderStepReport report;
  report.step = step_ + 1;
  report.current_lr = lr;
  {
    Graph dis;
    Var real_scores = pair_.D.forward(dis, dis.constant(in.d_real_in), ctx);
    Var fake_scores = pair_.D.forward(dis, dis.constant(discriminator_input(in.condition, fake.value())), ctx);
    Var d_loss = lsgan_d_loss(real_scores, fake_scores, config_.targets);
    require_finite(d_loss, "loss_D");
    report.loss_D = d_loss.value()[0];
    dis.backward(d_loss);
    AdamOptions opt = config_.adam;
    opt.lr = freeze_d_ ? 0.0 : lr;
    const auto params = pair_.D.parameters();
    adam_step(params, opt);
  }
  after_d_ = {parameter_hash(pair_.G.parameters()), parameter_hash(pair_.D.parameters())};

  Var fake_in = concat_channels(gen.constant(in.condition), fake);
  Var fake_scores = pair_.D.forward(gen, fake_in, ctx.frozen());
  const DecoderGeneratorLoss g_loss =
      lsgan_g_loss(fake_scores, fake, gen.constant(image), config_.lambda_l1, config_.targets);
  require_finite(g_loss.adv, "loss_adv");
  require_finite(g_loss.l1, "loss_l1");
  require_finite(g_loss.total, "total_generator");
  report.loss_adv = g_loss.adv.value()[0];
  report.loss_l1 = g_loss.l1.value()[0];
  report.total_generator = g_loss.total.value()[0];
  gen.backward(g_loss.total);
  AdamOptions opt = config_.adam;
  opt.lr = freeze_g_ ? 0.0 : lr;
  const auto params = pair_.G.parameters();
  adam_step(params, opt);

  ++step_;
  schedule_.observe(report.total_generator);
  history_.push_back(report);
  return report;
}

Tensor translate(Network& G, const Tensor& sketch, int label_id, int num_classes, LabelEncoding encoding) {
  if (sketch.rank() != 3) throw ShapeError("translate: expected a (3, H, W) sketch, got " + shape_str(sketch.shape()));
  const Tensor planes = broadcast_label(label_id, num_classes, static_cast<int>(sketch.dim(1)),
                                        static_cast<int>(sketch.dim(2)), encoding);
  const Tensor g_in = concat_tensors(sketch.reshaped({1, sketch.dim(0), sketch.dim(1), sketch.dim(2)}),
                                     planes.reshaped({1, planes.dim(0), planes.dim(1), planes.dim(2)}));
  Tensor out = G.infer(g_in);
  return out.reshaped({out.dim(1), out.dim(2), out.dim(3)});
}

}  // namespace sketchpair
