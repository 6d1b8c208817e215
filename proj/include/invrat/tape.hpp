// Copyright 2026 The InvRat Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// A small reverse-mode differentiation tape over dense double arrays.
//
// Usage:
//
//   Tape tape;
//   Var w = tape.parameter(store.get("w"));
//   Var loss = Mean(Sigmoid(Affine(w, b, tape.constant(x))));
//   tape.backward(loss);          // accumulates into Parameter::grad
//
// Nodes are appended in evaluation order, so the node vector is already a
// topological order and backward() is a single reverse sweep. A tape is
// single-threaded; build a fresh tape per forward pass.

#ifndef INVRAT_TAPE_HPP_
#define INVRAT_TAPE_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "invrat/array.hpp"

namespace invrat {

struct Parameter {
  std::string name;
  Array value;
  Array grad;
};

// Owns named parameters with stable addresses.
class ParameterStore {
 public:
  Parameter& add(std::string name, Shape shape);
  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  const Parameter* find(std::string_view name) const;

  std::vector<Parameter*> with_prefix(std::string_view prefix);
  std::deque<Parameter>& all() { return params_; }
  const std::deque<Parameter>& all() const { return params_; }

  void zero_grad();
  // FNV-1a over the raw bytes of every parameter value under `prefix`.
  std::uint64_t checksum(std::string_view prefix = "") const;

 private:
  std::deque<Parameter> params_;
};

class Tape;

class Var {
 public:
  Var() = default;

  const Array& value() const;
  const Array& grad() const;
  const Shape& shape() const { return value().shape(); }
  Tape* tape() const { return tape_; }
  std::size_t index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

class Tape {
 public:
  // Propagates the gradient stored at node `self` into its inputs.
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Array value);
  Var parameter(Parameter& param);

  // Registers an op output. `backward` may be empty for ops with no
  // differentiable inputs.
  Var record(std::string_view op, Array value, std::vector<Var> inputs,
             Backward backward);

  // Reverse sweep from a scalar loss. Node gradients are reset first, so the
  // same tape can be swept from several losses; parameter gradients
  // accumulate into Parameter::grad.
  void backward(Var loss);

  const Array& value(std::size_t i) const { return nodes_[i].value; }
  // Lazily zero-initialised gradient buffer of node i.
  Array& grad(std::size_t i);
  bool requires_grad(std::size_t i) const { return nodes_[i].requires_grad; }
  std::string_view op(std::size_t i) const { return nodes_[i].op; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::string_view op;
    Array value;
    Array grad;
    std::vector<std::size_t> parents;
    Backward backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
    bool touched = false;
  };

  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Ops. Every op validates shapes when the graph is built and throws
// ShapeError naming both shapes on mismatch. No broadcasting except the bias
// vector in Affine.

// table [V, d], ids shaped `ids_shape` -> ids_shape + [d].
Var Embed(Var table, const std::vector<int>& ids, const Shape& ids_shape);
// w [out, in], b [out], x [..., in] -> [..., out].
Var Affine(Var w, Var b, Var x);
Var Tanh(Var x);
Var Relu(Var x);
Var Sigmoid(Var x);
Var Abs(Var x);
// Softmax over the last axis.
Var Softmax(Var x);
// x [B, N, d], mask [B, N] -> [B, d]; sum of masked rows divided by
// max(sum(mask), 1).
Var MeanPoolMasked(Var x, Var mask);
Var Mul(Var a, Var b);
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Scale(Var a, double factor);
Var AddScalar(Var a, double c);
// Concatenate along the last axis; leading axes must agree.
Var Concat(Var a, Var b);
// Along the last axis: out[n] = sum of x[max(0, n-l+1) .. n].
Var CausalConvAllOnes(Var x, std::size_t l);
// Mean cross-entropy of softmax(logits [B, C]) against integer labels.
Var SoftmaxCrossEntropy(Var logits, const std::vector<int>& labels);
// Forward value is `hard`; the gradient passes to `soft` unchanged.
Var StraightThrough(const Array& hard, Var soft);
// x [B, N, d] -> out[b, n] = x[b, n + offset] or zeros outside [0, N).
Var Shift(Var x, long offset);
Var Reshape(Var x, Shape shape);
Var Sum(Var x);
Var Mean(Var x);
// Along the last axis: out[n] = x[n + 1] - x[n], length N - 1.
Var AdjacentDiff(Var x);

}  // namespace invrat

#endif  // INVRAT_TAPE_HPP_
