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

#include "qava/autodiff.hpp"

#include <malloc.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "qava/errors.hpp"

namespace qava::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

ConstMatMap AsMat(const Tensor& t) {
  return ConstMatMap(t.data().data(), static_cast<Eigen::Index>(t.dim(0)),
                     static_cast<Eigen::Index>(t.dim(1)));
}
MatMap AsMat(Tensor& t) {
  return MatMap(t.data().data(), static_cast<Eigen::Index>(t.dim(0)),
                static_cast<Eigen::Index>(t.dim(1)));
}

void RequireSameShape(const char* op, Var a, Var b) {
  if (a.shape() != b.shape()) {
    throw ArgumentError(std::string(op) + ": shape mismatch " + ShapeToString(a.shape()) + " vs " +
                        ShapeToString(b.shape()));
  }
}

void RequireMatrix(const char* op, Var a) {
  if (a.value().rank() != 2) {
    throw ArgumentError(std::string(op) + ": expected a 2-D input, got " + ShapeToString(a.shape()));
  }
}

Tape& TapeOf(Var a) {
  if (a.tape == nullptr) throw ContractError("Var is not attached to a tape");
  return *a.tape;
}

Tape& TapeOf(Var a, Var b) {
  if (a.tape != b.tape) throw ContractError("Vars belong to different tapes");
  return TapeOf(a);
}

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)

// Every evaluation builds and then frees a tape of a few MB. With glibc's
// default trim threshold that memory goes back to the kernel at the end of
// each one and is faulted in again by the next.
void KeepTapeMemory() {
#ifdef M_TRIM_THRESHOLD
  static std::once_flag once;
  std::call_once(once, [] { mallopt(M_TRIM_THRESHOLD, 64 << 20); });
#endif
}

}  // namespace

Tape::Tape(bool record) : record_(record) { KeepTapeMemory(); }

const Tensor& Var::value() const {
  if (tape == nullptr) throw ContractError("Var is not attached to a tape");
  return tape->value(id);
}

// ---------------------------------------------------------------------------
// Tape

Var Tape::Constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), Tensor(), false, nullptr});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::Leaf(Tensor value) {
  nodes_.push_back(Node{std::move(value), Tensor(), record_, nullptr});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::Push(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  if (!value.AllFinite()) {
    throw NumericError(std::string("non-finite value produced by op '") + op + "'");
  }
  bool needs = false;
  if (record_) {
    for (const Var& in : inputs) needs = needs || nodes_[in.id].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Tensor(), needs, needs ? std::move(backward) : nullptr});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Tensor& Tape::GradRef(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

void Tape::Backward(Var root) {
  if (root.tape != this) throw ContractError("Backward: root belongs to another tape");
  if (!record_) throw ContractError("Backward on a non-recording tape");
  if (nodes_[root.id].value.size() != 1) {
    throw ContractError("gradient requires a scalar objective, got shape " +
                        ShapeToString(nodes_[root.id].value.shape()));
  }
  for (Node& n : nodes_) n.grad = Tensor();
  GradRef(root.id)[0] = 1.0;
  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.backward && !n.grad.empty()) n.backward(*this, id);
  }
}

Tensor Tape::Grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad.empty()) return Tensor(n.value.shape());
  return n.grad;
}

// ---------------------------------------------------------------------------
// Element-wise ops

Var Add(Var a, Var b) {
  RequireSameShape("add", a, b);
  Tape& t = TapeOf(a, b);
  Tensor out = a.value();
  const auto bv = b.value().data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] += bv[i];
  const int ia = a.id, ib = b.id;
  return t.Push("add", std::move(out), {a, b}, [ia, ib](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    for (int in : {ia, ib}) {
      if (!tp.requires_grad(in)) continue;
      auto dst = tp.GradRef(in).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
    }
  });
}

Var Sub(Var a, Var b) {
  RequireSameShape("sub", a, b);
  Tape& t = TapeOf(a, b);
  Tensor out = a.value();
  const auto bv = b.value().data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] -= bv[i];
  const int ia = a.id, ib = b.id;
  return t.Push("sub", std::move(out), {a, b}, [ia, ib](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    if (tp.requires_grad(ia)) {
      auto dst = tp.GradRef(ia).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
    }
    if (tp.requires_grad(ib)) {
      auto dst = tp.GradRef(ib).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] -= g[i];
    }
  });
}

Var Mul(Var a, Var b) {
  RequireSameShape("mul", a, b);
  Tape& t = TapeOf(a, b);
  Tensor out = a.value();
  const auto bv = b.value().data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] *= bv[i];
  const int ia = a.id, ib = b.id;
  return t.Push("mul", std::move(out), {a, b}, [ia, ib](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    if (tp.requires_grad(ia)) {
      const Tensor& bv2 = tp.value(ib);
      auto dst = tp.GradRef(ia).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * bv2[i];
    }
    if (tp.requires_grad(ib)) {
      const Tensor& av2 = tp.value(ia);
      auto dst = tp.GradRef(ib).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * av2[i];
    }
  });
}

Var Scale(Var a, double s) {
  Tape& t = TapeOf(a);
  Tensor out = a.value();
  for (double& v : out.data()) v *= s;
  const int ia = a.id;
  return t.Push("scale", std::move(out), {a}, [ia, s](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    auto dst = tp.GradRef(ia).data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * g[i];
  });
}

Var AddScalar(Var a, double s) {
  Tape& t = TapeOf(a);
  Tensor out = a.value();
  for (double& v : out.data()) v += s;
  const int ia = a.id;
  return t.Push("add_scalar", std::move(out), {a}, [ia](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    auto dst = tp.GradRef(ia).data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
  });
}

Var Square(Var a) {
  Tape& t = TapeOf(a);
  Tensor out = a.value();
  for (double& v : out.data()) v *= v;
  const int ia = a.id;
  return t.Push("square", std::move(out), {a}, [ia](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    const Tensor& x = tp.value(ia);
    auto dst = tp.GradRef(ia).data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += 2.0 * x[i] * g[i];
  });
}

Var Gelu(Var a) {
  Tape& t = TapeOf(a);
  Tensor out = a.value();
  for (double& v : out.data()) {
    const double x = v;
    v = 0.5 * x * (1.0 + std::tanh(kGeluC * (x + 0.044715 * x * x * x)));
  }
  const int ia = a.id;
  return t.Push("gelu", std::move(out), {a}, [ia](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    const Tensor& xs = tp.value(ia);
    auto dst = tp.GradRef(ia).data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      const double x = xs[i];
      const double u = kGeluC * (x + 0.044715 * x * x * x);
      const double th = std::tanh(u);
      const double du = kGeluC * (1.0 + 3.0 * 0.044715 * x * x);
      const double d = 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du;
      dst[i] += g[i] * d;
    }
  });
}

Var Relu(Var a) {
  Tape& t = TapeOf(a);
  Tensor out = a.value();
  for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
  const int ia = a.id;
  return t.Push("relu", std::move(out), {a}, [ia](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    const Tensor& xs = tp.value(ia);
    auto dst = tp.GradRef(ia).data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      if (xs[i] > 0.0) dst[i] += g[i];
    }
  });
}

// ---------------------------------------------------------------------------
// Matrix ops

Var AddRow(Var m, Var row) {
  RequireMatrix("add_row", m);
  Tape& t = TapeOf(m, row);
  const std::size_t n = m.value().dim(0), d = m.value().dim(1);
  if (row.value().size() != d) {
    throw ArgumentError("add_row: row of " + std::to_string(row.value().size()) +
                        " elements for matrix " + ShapeToString(m.shape()));
  }
  Tensor out = m.value();
  const auto rv = row.value().data();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) out.at(r, c) += rv[c];
  }
  const int im = m.id, ir = row.id;
  return t.Push("add_row", std::move(out), {m, row}, [im, ir, n, d](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    if (tp.requires_grad(im)) {
      auto dst = tp.GradRef(im).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
    }
    if (tp.requires_grad(ir)) {
      auto dst = tp.GradRef(ir).data();
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) dst[c] += g.at(r, c);
      }
    }
  });
}

Var MatMul(Var a, Var b) {
  RequireMatrix("matmul", a);
  RequireMatrix("matmul", b);
  Tape& t = TapeOf(a, b);
  if (a.value().dim(1) != b.value().dim(0)) {
    throw ArgumentError("matmul: inner dimensions differ " + ShapeToString(a.shape()) + " x " +
                        ShapeToString(b.shape()));
  }
  Tensor out({a.value().dim(0), b.value().dim(1)});
  AsMat(out).noalias() = AsMat(a.value()) * AsMat(b.value());
  const int ia = a.id, ib = b.id;
  return t.Push("matmul", std::move(out), {a, b}, [ia, ib](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    if (tp.requires_grad(ia)) {
      AsMat(tp.GradRef(ia)).noalias() += AsMat(g) * AsMat(tp.value(ib)).transpose();
    }
    if (tp.requires_grad(ib)) {
      AsMat(tp.GradRef(ib)).noalias() += AsMat(tp.value(ia)).transpose() * AsMat(g);
    }
  });
}

Var MatMulT(Var a, Var b) {
  RequireMatrix("matmul_t", a);
  RequireMatrix("matmul_t", b);
  Tape& t = TapeOf(a, b);
  if (a.value().dim(1) != b.value().dim(1)) {
    throw ArgumentError("matmul_t: inner dimensions differ " + ShapeToString(a.shape()) + " x " +
                        ShapeToString(b.shape()) + "^T");
  }
  Tensor out({a.value().dim(0), b.value().dim(0)});
  AsMat(out).noalias() = AsMat(a.value()) * AsMat(b.value()).transpose();
  const int ia = a.id, ib = b.id;
  return t.Push("matmul_t", std::move(out), {a, b}, [ia, ib](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    if (tp.requires_grad(ia)) {
      AsMat(tp.GradRef(ia)).noalias() += AsMat(g) * AsMat(tp.value(ib));
    }
    if (tp.requires_grad(ib)) {
      AsMat(tp.GradRef(ib)).noalias() += AsMat(g).transpose() * AsMat(tp.value(ia));
    }
  });
}

Var SoftmaxRows(Var a, const Tensor* additive_mask) {
  RequireMatrix("softmax_rows", a);
  Tape& t = TapeOf(a);
  const std::size_t n = a.value().dim(0), d = a.value().dim(1);
  if (additive_mask != nullptr && additive_mask->shape() != a.shape()) {
    throw ArgumentError("softmax_rows: mask shape " + ShapeToString(additive_mask->shape()) +
                        " does not match " + ShapeToString(a.shape()));
  }
  Tensor out = a.value();
  for (std::size_t r = 0; r < n; ++r) {
    double mx = -INFINITY;
    for (std::size_t c = 0; c < d; ++c) {
      if (additive_mask) out.at(r, c) += additive_mask->at(r, c);
      mx = std::max(mx, out.at(r, c));
    }
    double z = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double e = std::exp(out.at(r, c) - mx);
      out.at(r, c) = e;
      z += e;
    }
    for (std::size_t c = 0; c < d; ++c) out.at(r, c) /= z;
  }
  const int ia = a.id;
  return t.Push("softmax_rows", std::move(out), {a}, [ia, n, d](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    const Tensor& y = tp.value(self);
    Tensor& dst = tp.GradRef(ia);
    for (std::size_t r = 0; r < n; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < d; ++c) dot += g.at(r, c) * y.at(r, c);
      for (std::size_t c = 0; c < d; ++c) dst.at(r, c) += y.at(r, c) * (g.at(r, c) - dot);
    }
  });
}

Var LayerNormRows(Var a, Var gain, Var bias, double eps) {
  RequireMatrix("layer_norm", a);
  Tape& t = TapeOf(a, gain);
  TapeOf(a, bias);
  const std::size_t n = a.value().dim(0), d = a.value().dim(1);
  if (gain.value().size() != d || bias.value().size() != d) {
    throw ArgumentError("layer_norm: gain/bias size does not match width " + std::to_string(d));
  }
  // Cache normalized activations and inverse std for the backward pass.
  Tensor xhat({n, d});
  std::vector<double> inv_std(n);
  Tensor out({n, d});
  const auto gv = gain.value().data();
  const auto bv = bias.value().data();
  for (std::size_t r = 0; r < n; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < d; ++c) mean += a.value().at(r, c);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double dx = a.value().at(r, c) - mean;
      var += dx * dx;
    }
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      xhat.at(r, c) = (a.value().at(r, c) - mean) * inv_std[r];
      out.at(r, c) = xhat.at(r, c) * gv[c] + bv[c];
    }
  }
  const int ia = a.id, ig = gain.id, ib = bias.id;
  return t.Push("layer_norm", std::move(out), {a, gain, bias},
                [ia, ig, ib, n, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                    Tape& tp, int self) {
                  const Tensor& g = tp.GradRef(self);
                  const auto gv2 = tp.value(ig).data();
                  if (tp.requires_grad(ig)) {
                    auto dst = tp.GradRef(ig).data();
                    for (std::size_t r = 0; r < n; ++r)
                      for (std::size_t c = 0; c < d; ++c) dst[c] += g.at(r, c) * xhat.at(r, c);
                  }
                  if (tp.requires_grad(ib)) {
                    auto dst = tp.GradRef(ib).data();
                    for (std::size_t r = 0; r < n; ++r)
                      for (std::size_t c = 0; c < d; ++c) dst[c] += g.at(r, c);
                  }
                  if (tp.requires_grad(ia)) {
                    Tensor& dst = tp.GradRef(ia);
                    const double inv_d = 1.0 / static_cast<double>(d);
                    for (std::size_t r = 0; r < n; ++r) {
                      double sum_gy = 0.0, sum_gy_xhat = 0.0;
                      for (std::size_t c = 0; c < d; ++c) {
                        const double gy = g.at(r, c) * gv2[c];
                        sum_gy += gy;
                        sum_gy_xhat += gy * xhat.at(r, c);
                      }
                      for (std::size_t c = 0; c < d; ++c) {
                        const double gy = g.at(r, c) * gv2[c];
                        dst.at(r, c) += inv_std[r] *
                                        (gy - inv_d * sum_gy - xhat.at(r, c) * inv_d * sum_gy_xhat);
                      }
                    }
                  }
                });
}

Var ConcatRows(Var a, Var b) {
  RequireMatrix("concat_rows", a);
  RequireMatrix("concat_rows", b);
  Tape& t = TapeOf(a, b);
  if (a.value().dim(1) != b.value().dim(1)) {
    throw ArgumentError("concat_rows: widths differ " + ShapeToString(a.shape()) + " vs " +
                        ShapeToString(b.shape()));
  }
  const std::size_t na = a.value().size();
  std::vector<double> data(a.value().values());
  data.insert(data.end(), b.value().values().begin(), b.value().values().end());
  Tensor out({a.value().dim(0) + b.value().dim(0), a.value().dim(1)}, std::move(data));
  const int ia = a.id, ib = b.id;
  return t.Push("concat_rows", std::move(out), {a, b}, [ia, ib, na](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    if (tp.requires_grad(ia)) {
      auto dst = tp.GradRef(ia).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
    }
    if (tp.requires_grad(ib)) {
      auto dst = tp.GradRef(ib).data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[na + i];
    }
  });
}

Var SliceRows(Var a, std::size_t begin, std::size_t end) {
  RequireMatrix("slice_rows", a);
  Tape& t = TapeOf(a);
  const std::size_t rows = a.value().dim(0), d = a.value().dim(1);
  if (begin >= end || end > rows) {
    throw ArgumentError("slice_rows: invalid range [" + std::to_string(begin) + ", " +
                        std::to_string(end) + ") of " + std::to_string(rows) + " rows");
  }
  const auto src = a.value().data();
  Tensor out({end - begin, d},
             std::vector<double>(src.begin() + static_cast<std::ptrdiff_t>(begin * d),
                                 src.begin() + static_cast<std::ptrdiff_t>(end * d)));
  const int ia = a.id;
  return t.Push("slice_rows", std::move(out), {a}, [ia, begin, d](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    auto dst = tp.GradRef(ia).data();
    for (std::size_t i = 0; i < g.size(); ++i) dst[begin * d + i] += g[i];
  });
}

Var Reshape(Var a, Shape shape) {
  Tape& t = TapeOf(a);
  Tensor out = a.value().Reshaped(std::move(shape));
  const int ia = a.id;
  return t.Push("reshape", std::move(out), {a}, [ia](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    auto dst = tp.GradRef(ia).data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
  });
}

Var Gather(Var a, std::vector<std::int64_t> index, Shape out_shape) {
  Tape& t = TapeOf(a);
  if (index.size() != NumElements(out_shape)) {
    throw ArgumentError("gather: index count does not match output shape");
  }
  const auto src = a.value().data();
  Tensor out(out_shape);
  auto ov = out.data();
  for (std::size_t i = 0; i < index.size(); ++i) {
    const std::int64_t k = index[i];
    if (k < -1 || k >= static_cast<std::int64_t>(src.size())) {
      throw ArgumentError("gather: index out of range");
    }
    ov[i] = k < 0 ? 0.0 : src[static_cast<std::size_t>(k)];
  }
  const int ia = a.id;
  return t.Push("gather", std::move(out), {a}, [ia, index = std::move(index)](Tape& tp, int self) {
    const Tensor& g = tp.GradRef(self);
    auto dst = tp.GradRef(ia).data();
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i] >= 0) dst[static_cast<std::size_t>(index[i])] += g[i];
    }
  });
}

Var Sum(Var a) {
  Tape& t = TapeOf(a);
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const int ia = a.id;
  return t.Push("sum", Tensor::Scalar(s), {a}, [ia](Tape& tp, int self) {
    const double g = tp.GradRef(self)[0];
    for (double& v : tp.GradRef(ia).data()) v += g;
  });
}

Var Mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  Tape& t = TapeOf(a);
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const int ia = a.id;
  return t.Push("mean", Tensor::Scalar(s / n), {a}, [ia, n](Tape& tp, int self) {
    const double g = tp.GradRef(self)[0] / n;
    for (double& v : tp.GradRef(ia).data()) v += g;
  });
}

Var CrossEntropy(Var logits, std::size_t label) {
  Tape& t = TapeOf(logits);
  const auto z = logits.value().data();
  if (label >= z.size()) {
    throw ArgumentError("cross_entropy: label " + std::to_string(label) + " outside vocabulary of " +
                        std::to_string(z.size()));
  }
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  const int il = logits.id;
  return t.Push("cross_entropy", Tensor::Scalar(lse - z[label]), {logits},
                [il, label, lse](Tape& tp, int self) {
                  const double g = tp.GradRef(self)[0];
                  const auto zs = tp.value(il).data();
                  auto dst = tp.GradRef(il).data();
                  for (std::size_t i = 0; i < zs.size(); ++i) {
                    dst[i] += g * (std::exp(zs[i] - lse) - (i == label ? 1.0 : 0.0));
                  }
                });
}

// ---------------------------------------------------------------------------
// Gradient entry points

Tensor Grad(const Objective& objective, const Tensor& at) {
  Tape tape;
  Var x = tape.Leaf(at);
  Var y = objective(x);
  if (y.tape != &tape) throw ContractError("objective returned a node from another tape");
  tape.Backward(y);
  return tape.Grad(x);
}

double Evaluate(const Objective& objective, const Tensor& at) {
  Tape tape(false);
  Var x = tape.Leaf(at);
  Var y = objective(x);
  if (y.value().size() != 1) {
    throw ContractError("objective must be scalar, got shape " + ShapeToString(y.shape()));
  }
  return y.item();
}

Tensor FiniteDiffGrad(const std::function<double(const Tensor&)>& objective, const Tensor& at,
                      double h) {
  if (!(h > 0.0)) throw ArgumentError("finite difference step must be positive");
  Tensor out(at.shape());
  Tensor probe = at;
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = objective(probe);
    probe[i] = orig - h;
    const double down = objective(probe);
    probe[i] = orig;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

Tensor FiniteDiffGrad(const Objective& objective, const Tensor& at, double h) {
  return FiniteDiffGrad([&](const Tensor& x) { return Evaluate(objective, x); }, at, h);
}

double RelativeError(const Tensor& a, const Tensor& b, double floor) {
  double scale = floor;
  for (double v : b.data()) scale = std::max(scale, std::abs(v));
  return MaxAbsDiff(a, b) / scale;
}

}  // namespace qava::ad
