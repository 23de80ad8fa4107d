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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sketchpair/tensor.hpp"

namespace sketchpair {

/// A trainable tensor plus its gradient and Adam state.
///
/// `grad`, `first_moment` and `second_moment` stay empty until they are
/// first needed (backward reaches the parameter, or an optimizer step runs);
/// once allocated they always have the shape of `value`.
struct Parameter {
  Parameter(std::string name, Tensor value) : name(std::move(name)), value(std::move(value)) {}

  std::string name;
  Tensor value;
  Tensor grad;
  Tensor first_moment;
  Tensor second_moment;
  std::int64_t step = 0;

  /// Allocates a zero gradient on first use.
  Tensor& gradient();
  void zero_grad();
};

using ParameterList = std::vector<Parameter*>;

/// FNV-1a over names and raw values of every parameter.
std::uint64_t parameter_hash(std::span<Parameter* const> params);

class Graph;

/// Handle to a value recorded on a Graph.
struct Var {
  Graph* graph = nullptr;
  std::size_t index = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Adjoint of one recorded operation: receives the gradient of the operation's
/// output and pushes contributions to its inputs via Graph::accumulate.
using BackwardFn = std::function<void(Graph&, const Tensor& out_grad)>;

/// Ordered record of executed operations (a gradient tape).
///
/// Values live on the graph until it is destroyed. A graph built with
/// `track_gradients = false` keeps no adjoints, which is what inference uses.
class Graph {
 public:
  explicit Graph(bool track_gradients = true) : track_(track_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// Leaf bound to a parameter; backward adds into `p.grad` unless `trainable` is false.
  Var param(Parameter& p, bool trainable = true);

  /// Records an operation result. `fn` is dropped when no input needs a gradient.
  Var record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);

  /// Reverse sweep from a single-element loss. Populates gradients of every
  /// parameter reachable from `loss`.
  void backward(const Var& loss);

  void accumulate(const Var& v, const Tensor& grad);
  bool requires_grad(const Var& v) const { return nodes_[v.index].requires_grad; }
  bool tracking() const { return track_; }

  const Tensor& value(const Var& v) const;
  std::size_t size() const { return nodes_.size(); }
  const char* op_name(std::size_t index) const { return nodes_[index].op; }

  /// Node indices whose adjoints ran during the last backward, in visit order.
  const std::vector<std::size_t>& last_backward_order() const { return visited_; }

 private:
  struct Node {
    const char* op = "";
    Tensor value;
    const Tensor* external = nullptr;
    Parameter* parameter = nullptr;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  bool track_;
  std::vector<Node> nodes_;
  std::vector<std::size_t> visited_;
};

}  // namespace sketchpair
