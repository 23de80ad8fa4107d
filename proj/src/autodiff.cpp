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

#include "sketchpair/autodiff.hpp"

#include "sketchpair/errors.hpp"

namespace sketchpair {

Tensor& Parameter::gradient() {
  if (grad.shape() != value.shape()) grad = Tensor(value.shape());
  return grad;
}

void Parameter::zero_grad() {
  if (!grad.empty()) grad.fill(0.0f);
}

std::uint64_t parameter_hash(std::span<Parameter* const> params) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Parameter* p : params) {
    for (unsigned char c : p->name) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h = content_hash(p->value, h);
  }
  return h;
}

const Tensor& Var::value() const { return graph->value(*this); }

const Tensor& Graph::value(const Var& v) const {
  const Node& n = nodes_.at(v.index);
  return n.external ? *n.external : n.value;
}

Var Graph::constant(Tensor value) {
  Node n;
  n.op = "constant";
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

Var Graph::param(Parameter& p, bool trainable) {
  Node n;
  n.op = "parameter";
  n.external = &p.value;
  n.parameter = trainable ? &p : nullptr;
  n.requires_grad = track_ && trainable;
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

Var Graph::record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  Node n;
  n.op = op;
  n.value = std::move(value);
  if (track_) {
    for (const Var& in : inputs) {
      if (in.graph != this) throw Error(std::string(op) + ": input belongs to another graph");
      n.requires_grad = n.requires_grad || nodes_[in.index].requires_grad;
    }
  }
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{this, nodes_.size() - 1};
}

void Graph::accumulate(const Var& v, const Tensor& grad) {
  Node& n = nodes_[v.index];
  if (!n.requires_grad) return;
  const Tensor& val = n.external ? *n.external : n.value;
  if (grad.shape() != val.shape()) {
    throw ShapeError(std::string("gradient for '") + n.op + "' has shape " + shape_str(grad.shape()) +
                     ", expected " + shape_str(val.shape()));
  }
  if (n.grad.empty()) {
    n.grad = grad;
    return;
  }
  float* dst = n.grad.raw();
  const float* src = grad.raw();
  for (std::size_t i = 0; i < n.grad.size(); ++i) dst[i] += src[i];
}

void Graph::backward(const Var& loss) {
  if (loss.graph != this) throw Error("backward: loss belongs to another graph");
  if (value(loss).size() != 1) {
    throw ShapeError("backward requires a scalar loss, got " + shape_str(value(loss).shape()));
  }
  visited_.clear();
  if (!nodes_[loss.index].requires_grad) return;
  nodes_[loss.index].grad = Tensor(value(loss).shape(), 1.0f);

  for (std::size_t i = loss.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty()) continue;
    if (n.backward) {
      visited_.push_back(i);
      // Intermediate gradients are released as soon as their adjoint has run.
      Tensor g = std::move(n.grad);
      n.grad = Tensor();
      n.backward(*this, g);
    } else if (n.parameter) {
      Tensor& dst = n.parameter->gradient();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += n.grad[k];
      n.grad = Tensor();
    }
  }
}

}  // namespace sketchpair
