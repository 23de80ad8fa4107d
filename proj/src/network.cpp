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

#include "sketchpair/network.hpp"

#include <random>

#include "sketchpair/errors.hpp"
#include "sketchpair/ops.hpp"

namespace sketchpair {

std::size_t Network::add_param(const std::string& name, Shape shape, std::uint64_t seed, float fill, bool random) {
  Tensor value(std::move(shape), fill);
  if (random) {
    std::mt19937_64 gen(stream_key(seed, name, 0));
    std::normal_distribution<double> dist(0.0, options_.init_std);
    for (float& v : value.data()) v = static_cast<float>(dist(gen));
  }
  params_.emplace_back(name, std::move(value));
  return params_.size() - 1;
}

Network Network::build(std::string name, NetworkSpec spec, Role role, std::uint64_t seed,
                       const NetworkOptions& options, bool random_init) {
  std::size_t n_down = 0, n_up = 0;
  bool seen_up = false;
  for (const LayerToken& t : spec.tokens) {
    if (t.kind == LayerKind::Down) {
      ++n_down;
      if (seen_up) throw BuildError(name + ": D layer after a U layer in " + spec.arch());
    }
    if (t.kind == LayerKind::Up) {
      ++n_up;
      seen_up = true;
    }
  }
  if (role == Role::Generator) {
    if (spec.head != Head::None) throw BuildError(name + ": generators take no score head");
    if (n_down != n_up || n_down == 0) {
      throw BuildError(name + ": generator needs matching D and U counts, got " + std::to_string(n_down) + " D and " +
                       std::to_string(n_up) + " U in " + spec.arch());
    }
    if (spec.tokens.back().kind != LayerKind::Up) throw BuildError(name + ": generator must end with a U layer");
    if (spec.skip_pairs != pair_skips(spec.tokens)) throw BuildError(name + ": skip pairs are not mirror pairs");
  } else {
    for (const LayerToken& t : spec.tokens) {
      if (t.kind != LayerKind::Down) {
        throw BuildError(name + ": discriminators take only D layers, got " + spec.arch());
      }
    }
    if (!spec.skip_pairs.empty()) throw BuildError(name + ": discriminators have no skip connections");
  }
  // Rejects specs whose shapes do not work out at the configured size.
  const auto shapes = infer_shapes(spec, Shape{spec.input_channels, spec.input_size, spec.input_size});

  Network net;
  net.name_ = std::move(name);
  net.spec_ = std::move(spec);
  net.role_ = role;
  net.options_ = options;
  net.params_.reserve(net.spec_.tokens.size() * 6 + 1);

  const auto& tokens = net.spec_.tokens;
  int down_ordinal = 0, up_ordinal = 0, res_ordinal = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const LayerToken& t = tokens[i];
    Layer layer;
    layer.kind = t.kind;
    layer.last = i + 1 == tokens.size();
    const std::int64_t in_c = shapes[i].in_channels;
    const std::int64_t out_c = t.channels;
    switch (t.kind) {
      case LayerKind::Down: {
        layer.scope = net.name_ + "/down" + std::to_string(down_ordinal);
        layer.down_ordinal = down_ordinal++;
        layer.norm = layer.down_ordinal > 0;
        layer.params.push_back(net.add_param(layer.scope + "/kernel", {out_c, in_c, 4, 4}, seed, 0.0f, random_init));
        break;
      }
      case LayerKind::Up: {
        layer.scope = net.name_ + "/up" + std::to_string(up_ordinal);
        for (const SkipPair& p : net.spec_.skip_pairs) {
          if (p.up == i) layer.skip_from = net.layers_.at(p.down).down_ordinal;
        }
        layer.norm = !layer.last;
        layer.dropout = !layer.last && up_ordinal < options.dropout_layers;
        ++up_ordinal;
        layer.params.push_back(net.add_param(layer.scope + "/kernel", {in_c, out_c, 4, 4}, seed, 0.0f, random_init));
        break;
      }
      case LayerKind::Residual: {
        layer.scope = net.name_ + "/res" + std::to_string(res_ordinal++);
        for (int k = 0; k < 2; ++k) {
          const std::string conv = layer.scope + "/conv" + std::to_string(k);
          const std::string norm = layer.scope + "/norm" + std::to_string(k);
          layer.params.push_back(net.add_param(conv + "/kernel", {out_c, out_c, 3, 3}, seed, 0.0f, random_init));
          layer.params.push_back(net.add_param(norm + "/gain", {out_c}, seed, 1.0f, false));
          layer.params.push_back(net.add_param(norm + "/bias", {out_c}, seed, 0.0f, false));
        }
        break;
      }
    }
    if (t.kind != LayerKind::Residual && layer.norm) {
      layer.params.push_back(net.add_param(layer.scope + "/norm/gain", {out_c}, seed, 1.0f, false));
      layer.params.push_back(net.add_param(layer.scope + "/norm/bias", {out_c}, seed, 0.0f, false));
    }
    net.layers_.push_back(std::move(layer));
  }
  if (net.spec_.head == Head::ScalarScore) {
    const std::int64_t c = tokens.empty() ? net.spec_.input_channels : tokens.back().channels;
    net.head_param_ = static_cast<int>(net.add_param(net.name_ + "/head/kernel", {1, c, 4, 4}, seed, 0.0f, random_init));
  }
  return net;
}

Var Network::forward(Graph& graph, Var x, const ForwardContext& ctx) {
  const Shape& xs = x.shape();
  if (xs.size() != 4 || xs[1] != spec_.input_channels || xs[2] != spec_.input_size || xs[3] != spec_.input_size) {
    throw ShapeError(name_ + " expects (B, " + std::to_string(spec_.input_channels) + ", " +
                     std::to_string(spec_.input_size) + ", " + std::to_string(spec_.input_size) + "), got " +
                     shape_str(xs));
  }
  const bool generator = role_ == Role::Generator;
  const float alpha = generator ? options_.generator_alpha : options_.discriminator_alpha;
  auto p = [&](std::size_t index) { return graph.param(params_[index], ctx.param_grads); };

  std::vector<Var> skips;
  Var h = x;
  for (const Layer& layer : layers_) {
    switch (layer.kind) {
      case LayerKind::Down:
        h = conv2d(h, p(layer.params[0]), 2, 1);
        if (layer.norm) h = instance_norm(h, p(layer.params[1]), p(layer.params[2]), options_.norm_eps);
        h = leaky_relu(h, alpha);
        skips.push_back(h);
        break;
      case LayerKind::Up:
        if (layer.skip_from >= 0) h = concat_channels(h, skips.at(static_cast<std::size_t>(layer.skip_from)));
        h = conv_transpose2d(h, p(layer.params[0]), 2, 1);
        if (layer.last) {
          h = tanh(h);
          break;
        }
        if (layer.norm) h = instance_norm(h, p(layer.params[1]), p(layer.params[2]), options_.norm_eps);
        if (layer.dropout) {
          h = dropout(h, options_.dropout_rate, ctx.train, stream_key(ctx.seed ^ (ctx.salt * 0x9e3779b97f4a7c15ULL), layer.scope + "/dropout", ctx.step));
        }
        h = leaky_relu(h, alpha);
        break;
      case LayerKind::Residual: {
        const ResidualWeights w{p(layer.params[0]), p(layer.params[1]), p(layer.params[2]),
                                p(layer.params[3]), p(layer.params[4]), p(layer.params[5])};
        h = residual_block(h, w, options_.norm_eps);
        break;
      }
    }
  }
  if (head_param_ >= 0) {
    h = conv2d(h, p(static_cast<std::size_t>(head_param_)), 1, 1);
    h = spatial_mean(h);
  }
  return h;
}

Tensor Network::infer(const Tensor& x) {
  Graph graph(false);
  return forward(graph, graph.constant(x), ForwardContext{}).value();
}

ParameterList Network::parameters() {
  ParameterList out;
  out.reserve(params_.size());
  for (Parameter& p : params_) out.push_back(&p);
  return out;
}

Parameter& Network::parameter(const std::string& name) {
  for (Parameter& p : params_) {
    if (p.name == name) return p;
  }
  throw Error(name_ + ": no parameter named " + name);
}

std::size_t Network::count_params() const {
  std::size_t n = 0;
  for (const Parameter& p : params_) n += p.value.size();
  return n;
}

Shape Network::output_shape(std::int64_t batch) const {
  if (spec_.head == Head::ScalarScore) return Shape{batch};
  if (spec_.tokens.empty()) return Shape{batch, spec_.input_channels, spec_.input_size, spec_.input_size};
  const auto shapes = infer_shapes(spec_, Shape{spec_.input_channels, spec_.input_size, spec_.input_size});
  Shape out = shapes.back().output;
  out.insert(out.begin(), batch);
  return out;
}

}  // namespace sketchpair
