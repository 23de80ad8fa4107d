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
#include <vector>

#include "sketchpair/autodiff.hpp"
#include "sketchpair/netspec.hpp"

namespace sketchpair {

enum class Role { Generator, Discriminator };

struct NetworkOptions {
  float generator_alpha = 0.2f;      ///< leaky rectifier slope in generators
  float discriminator_alpha = 0.0f;  ///< plain rectifier in discriminators
  float dropout_rate = 0.5f;
  int dropout_layers = 3;            ///< innermost U layers that use dropout
  double init_std = 0.02;
  double norm_eps = 1e-5;
};

/// Mode for one forward pass. Dropout masks derive from (seed, salt, layer, step);
/// `salt` separates several applications of one network within a step.
struct ForwardContext {
  bool train = false;
  std::uint64_t seed = 0;
  std::int64_t step = 0;
  std::uint64_t salt = 0;
  /// When false the parameters enter the graph as constants and receive no gradient.
  bool param_grads = true;

  ForwardContext with_salt(std::uint64_t s) const {
    ForwardContext c = *this;
    c.salt = s;
    return c;
  }
  ForwardContext frozen() const {
    ForwardContext c = *this;
    c.param_grads = false;
    return c;
  }
};

/// A built generator or discriminator and its parameters.
class Network {
 public:
  /// Generators: D/U/R stack with U-net skips and a tanh output.
  /// Discriminators: D stack, then (with a score head) a 1-channel 4x4
  /// convolution averaged to one raw score per batch item.
  /// With `random_init` false all kernels start at zero (used when values are loaded afterwards).
  static Network build(std::string name, NetworkSpec spec, Role role, std::uint64_t seed,
                       const NetworkOptions& options = {}, bool random_init = true);

  /// x: (B, C, S, S) with C and S from the spec.
  Var forward(Graph& graph, Var x, const ForwardContext& ctx);

  /// Eval-mode forward without gradient tracking.
  Tensor infer(const Tensor& x);

  const std::string& name() const { return name_; }
  const NetworkSpec& spec() const { return spec_; }
  Role role() const { return role_; }
  const NetworkOptions& options() const { return options_; }

  ParameterList parameters();
  std::vector<Parameter>& parameter_storage() { return params_; }
  const std::vector<Parameter>& parameter_storage() const { return params_; }
  Parameter& parameter(const std::string& name);
  std::size_t count_params() const;

  /// Output shape for a batch of `batch` items.
  Shape output_shape(std::int64_t batch) const;

 private:
  struct Layer {
    LayerKind kind;
    std::string scope;
    int down_ordinal = -1;  ///< D layers: index among D layers
    int skip_from = -1;     ///< U layers: D ordinal whose output is concatenated
    bool norm = false;
    bool dropout = false;
    bool last = false;
    std::vector<std::size_t> params;
  };

  std::size_t add_param(const std::string& name, Shape shape, std::uint64_t seed, float fill, bool random);

  std::string name_;
  NetworkSpec spec_;
  Role role_ = Role::Generator;
  NetworkOptions options_;
  std::vector<Parameter> params_;
  std::vector<Layer> layers_;
  int head_param_ = -1;
};

}  // namespace sketchpair
