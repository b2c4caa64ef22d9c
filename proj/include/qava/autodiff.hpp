// Copyright 2026 The QAVA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QAVA_AUTODIFF_HPP_
#define QAVA_AUTODIFF_HPP_

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

#include "qava/tensor.hpp"

namespace qava::ad {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  double item() const { return value().item(); }
};

// Reverse-mode tape. Nodes are appended in evaluation order, so a reverse
// sweep over indices is a valid topological order.
//
// A non-recording tape computes identical forward values but stores no
// backward closures; it is used for inference and finite differences.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  explicit Tape(bool record = true);
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Tensor value);
  // A differentiable input (image under attack, trainable parameter).
  Var Leaf(Tensor value);

  // Appends an op result. Throws NumericError naming `op` if the value is
  // not finite.
  Var Push(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);

  const Tensor& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(root)/d(root) = 1 and sweeps backwards. root must be a scalar.
  void Backward(Var root);

  // Gradient accumulated for a node by the last Backward(); zeros if none.
  Tensor Grad(Var v) const;

  // For backward closures: gradient buffer of a node, allocated on demand.
  Tensor& GradRef(int id);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  bool record_;
};

// Element-wise, shapes must match exactly.
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double s);
Var AddScalar(Var a, double s);
Var Square(Var a);
Var Gelu(Var a);  // tanh approximation
Var Relu(Var a);

// m: [n x d], row: d elements. Adds row to every row of m.
Var AddRow(Var m, Var row);
// [n x k] * [k x m]
Var MatMul(Var a, Var b);
// [n x k] * [m x k]^T
Var MatMulT(Var a, Var b);

// Row-wise softmax of a 2-D input; optional additive mask of the same shape
// (use a large negative constant for disallowed entries).
Var SoftmaxRows(Var a, const Tensor* additive_mask = nullptr);
Var LayerNormRows(Var a, Var gain, Var bias, double eps = 1e-5);

Var ConcatRows(Var a, Var b);
Var SliceRows(Var a, std::size_t begin, std::size_t end);
Var Reshape(Var a, Shape shape);

// out[i] = a[index[i]] (row-major flat indexing); index -1 yields 0.
// Backward scatter-adds.
Var Gather(Var a, std::vector<std::int64_t> index, Shape out_shape);

Var Sum(Var a);
Var Mean(Var a);
// Negative log-softmax probability of `label` under flat logits.
Var CrossEntropy(Var logits, std::size_t label);

// ---- Gradient entry points ----

using Objective = std::function<Var(Var)>;

// d objective / d at. The objective must return a scalar node.
Tensor Grad(const Objective& objective, const Tensor& at);
// Objective value without recording.
double Evaluate(const Objective& objective, const Tensor& at);

// Central differences: (f(x + h e_i) - f(x - h e_i)) / 2h for each element.
Tensor FiniteDiffGrad(const std::function<double(const Tensor&)>& objective, const Tensor& at,
                      double h);
Tensor FiniteDiffGrad(const Objective& objective, const Tensor& at, double h);

// max_i |a_i - b_i| / max(max_i |b_i|, floor): a scale-aware relative error.
double RelativeError(const Tensor& a, const Tensor& b, double floor = 1e-12);

}  // namespace qava::ad

#endif  // QAVA_AUTODIFF_HPP_
