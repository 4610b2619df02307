// Copyright 2026 The DLG Authors.
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

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dlg/matrix.hpp"
#include "dlg/param_store.hpp"

namespace dlg {

// Reverse-mode differentiation over a closed set of dense-matrix primitives.
//
// Every operation evaluates eagerly and records how to push gradients back to
// its inputs. backward(root) seeds d(root)=1 at a 1x1 node, sweeps the tape in
// reverse creation order, and accumulates leaf gradients into the bound
// ParameterStores (+=, so separate backward calls accumulate until the store
// is reset).
//
// Stochastic noise enters only through constant() leaves: it is held fixed
// with respect to all gradients, and re-running backward with the same noise
// reproduces gradients bitwise.
class Tape {
 public:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  struct Var {
    std::size_t id = npos;
    bool valid() const { return id != npos; }
  };

  // ----- leaves -----

  Var constant(Matrix m) {
    require_finite("constant", m);
    return push(std::move(m), false, npos, npos, nullptr);
  }

  // Copies the current store value; backward adds this leaf's gradient into
  // the store's accumulator.
  Var param(ParameterStore& store, const std::string& name) {
    Var v = push(store.value(name), true, npos, npos, nullptr);
    nodes_[v.id].store = &store;
    nodes_[v.id].param_name = name;
    return v;
  }

  // ----- primitives -----

  Var matmul(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.cols() != B.rows()) {
      throw DimensionError("matmul: " + shape_str(A) + " * " + shape_str(B));
    }
    Matrix out = A * B;
    require_finite("matmul", out);
    return push(std::move(out), needs(a) || needs(b), a.id, b.id,
                [](Tape& t, const Node& nd) {
                  const Matrix& A = t.nodes_[nd.in[0]].value;
                  const Matrix& B = t.nodes_[nd.in[1]].value;
                  if (t.nodes_[nd.in[0]].needs_grad) {
                    t.grad_of(nd.in[0]).noalias() += nd.grad * B.transpose();
                  }
                  if (t.nodes_[nd.in[1]].needs_grad) {
                    t.grad_of(nd.in[1]).noalias() += A.transpose() * nd.grad;
                  }
                });
  }

  Var add(Var a, Var b) {
    require_same_shape("add", value(a), value(b));
    Matrix out = value(a) + value(b);
    require_finite("add", out);
    return push(std::move(out), needs(a) || needs(b), a.id, b.id,
                [](Tape& t, const Node& nd) {
                  if (t.nodes_[nd.in[0]].needs_grad)
                    t.grad_of(nd.in[0]) += nd.grad;
                  if (t.nodes_[nd.in[1]].needs_grad)
                    t.grad_of(nd.in[1]) += nd.grad;
                });
  }

  Var sub(Var a, Var b) {
    require_same_shape("sub", value(a), value(b));
    Matrix out = value(a) - value(b);
    require_finite("sub", out);
    return push(std::move(out), needs(a) || needs(b), a.id, b.id,
                [](Tape& t, const Node& nd) {
                  if (t.nodes_[nd.in[0]].needs_grad)
                    t.grad_of(nd.in[0]) += nd.grad;
                  if (t.nodes_[nd.in[1]].needs_grad)
                    t.grad_of(nd.in[1]) -= nd.grad;
                });
  }

  // Broadcast a 1xm row (bias) over every row of a.
  Var add_rowvec(Var a, Var bias) {
    const Matrix& A = value(a);
    const Matrix& B = value(bias);
    if (B.rows() != 1 || B.cols() != A.cols()) {
      throw DimensionError("add_rowvec: " + shape_str(A) + " + " +
                           shape_str(B));
    }
    Matrix out = A.rowwise() + B.row(0);
    require_finite("add_rowvec", out);
    return push(std::move(out), needs(a) || needs(bias), a.id, bias.id,
                [](Tape& t, const Node& nd) {
                  if (t.nodes_[nd.in[0]].needs_grad)
                    t.grad_of(nd.in[0]) += nd.grad;
                  if (t.nodes_[nd.in[1]].needs_grad)
                    t.grad_of(nd.in[1]).row(0) += nd.grad.colwise().sum();
                });
  }

  Var scale(Var a, double c) {
    Matrix out = value(a) * c;
    require_finite("scale", out);
    return push(std::move(out), needs(a), a.id, npos,
                [c](Tape& t, const Node& nd) {
                  if (t.nodes_[nd.in[0]].needs_grad)
                    t.grad_of(nd.in[0]) += c * nd.grad;
                });
  }

  Var add_scalar(Var a, double c) {
    Matrix out = value(a).array() + c;
    require_finite("add_scalar", out);
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (t.nodes_[nd.in[0]].needs_grad)
                    t.grad_of(nd.in[0]) += nd.grad;
                });
  }

  Var hadamard(Var a, Var b) {
    require_same_shape("hadamard", value(a), value(b));
    Matrix out = value(a).cwiseProduct(value(b));
    require_finite("hadamard", out);
    return push(std::move(out), needs(a) || needs(b), a.id, b.id,
                [](Tape& t, const Node& nd) {
                  const Matrix& A = t.nodes_[nd.in[0]].value;
                  const Matrix& B = t.nodes_[nd.in[1]].value;
                  if (t.nodes_[nd.in[0]].needs_grad)
                    t.grad_of(nd.in[0]) += nd.grad.cwiseProduct(B);
                  if (t.nodes_[nd.in[1]].needs_grad)
                    t.grad_of(nd.in[1]) += nd.grad.cwiseProduct(A);
                });
  }

  Var sigmoid(Var a) {
    Matrix out = value(a).unaryExpr(
        [](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    require_finite("sigmoid", out);
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (!t.nodes_[nd.in[0]].needs_grad) return;
                  Matrix s = nd.value;
                  t.grad_of(nd.in[0]).array() +=
                      nd.grad.array() * s.array() * (1.0 - s.array());
                });
  }

  Var tanh_(Var a) {
    Matrix out = value(a).array().tanh();
    require_finite("tanh", out);
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (!t.nodes_[nd.in[0]].needs_grad) return;
                  t.grad_of(nd.in[0]).array() +=
                      nd.grad.array() * (1.0 - nd.value.array().square());
                });
  }

  Var relu(Var a) {
    Matrix out = value(a).cwiseMax(0.0);
    require_finite("relu", out);
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (!t.nodes_[nd.in[0]].needs_grad) return;
                  const Matrix& A = t.nodes_[nd.in[0]].value;
                  t.grad_of(nd.in[0]).array() +=
                      nd.grad.array() * (A.array() > 0.0).cast<double>();
                });
  }

  Var exp_(Var a) {
    Matrix out = value(a).array().exp();
    require_finite("exp", out);  // overflow surfaces as inf here
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (!t.nodes_[nd.in[0]].needs_grad) return;
                  t.grad_of(nd.in[0]).array() +=
                      nd.grad.array() * nd.value.array();
                });
  }

  Var log_(Var a) {
    const Matrix& A = value(a);
    if ((A.array() <= 0.0).any()) {
      throw NumericDomainError("log: non-positive input entry");
    }
    Matrix out = A.array().log();
    require_finite("log", out);
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (!t.nodes_[nd.in[0]].needs_grad) return;
                  const Matrix& A = t.nodes_[nd.in[0]].value;
                  t.grad_of(nd.in[0]).array() +=
                      nd.grad.array() / A.array();
                });
  }

  // n x m -> n x 1, sum along each row (weighted degrees).
  Var row_sum(Var a) {
    Matrix out = value(a).rowwise().sum();
    require_finite("row_sum", out);
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (!t.nodes_[nd.in[0]].needs_grad) return;
                  const Matrix& A = t.nodes_[nd.in[0]].value;
                  t.grad_of(nd.in[0]) += nd.grad.replicate(1, A.cols());
                });
  }

  // n x m -> 1 x m, mean across rows (graph readout).
  Var mean_rows(Var a) {
    const Matrix& A = value(a);
    if (A.rows() < 1) throw DimensionError("mean_rows: empty input");
    Matrix out = A.colwise().mean();
    require_finite("mean_rows", out);
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (!t.nodes_[nd.in[0]].needs_grad) return;
                  const Matrix& A = t.nodes_[nd.in[0]].value;
                  double inv = 1.0 / static_cast<double>(A.rows());
                  t.grad_of(nd.in[0]) += inv * nd.grad.replicate(A.rows(), 1);
                });
  }

  // Rows scaled to unit L2 norm. A zero row passes through unchanged and
  // receives no gradient (reachable after relu).
  Var l2_normalize_rows(Var a) {
    const Matrix& A = value(a);
    Matrix out = A;
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      double n = A.row(r).norm();
      if (n > 0.0) out.row(r) /= n;
    }
    require_finite("l2_normalize_rows", out);
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (!t.nodes_[nd.in[0]].needs_grad) return;
                  const Matrix& A = t.nodes_[nd.in[0]].value;
                  Matrix& dst = t.grad_of(nd.in[0]);
                  for (Eigen::Index r = 0; r < A.rows(); ++r) {
                    double n = A.row(r).norm();
                    if (n == 0.0) continue;
                    const auto y = nd.value.row(r);
                    const auto g = nd.grad.row(r);
                    dst.row(r) += (g - g.dot(y) * y) / n;
                  }
                });
  }

  // 1 x m probability vector; computed with max subtraction.
  Var softmax_row(Var a) {
    Matrix out = stable_softmax(value(a, "softmax_row"));
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (!t.nodes_[nd.in[0]].needs_grad) return;
                  double dot = nd.grad.row(0).dot(nd.value.row(0));
                  Matrix shifted = nd.grad.array() - dot;
                  t.grad_of(nd.in[0]) += nd.value.cwiseProduct(shifted);
                });
  }

  // Fused log(softmax(x)); never evaluates log on an exact zero.
  Var log_softmax_row(Var a) {
    const Matrix& A = value(a, "log_softmax_row");
    double mx = A.maxCoeff();
    double lse = std::log((A.array() - mx).exp().sum()) + mx;
    Matrix out = A.array() - lse;
    require_finite("log_softmax_row", out);
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (!t.nodes_[nd.in[0]].needs_grad) return;
                  Matrix s = nd.value.array().exp();
                  double gsum = nd.grad.sum();
                  t.grad_of(nd.in[0]) += nd.grad - gsum * s;
                });
  }

  // 1 x m -> 1 x 1, log(sum(exp(x))) with max subtraction.
  Var logsumexp_row(Var a) {
    const Matrix& A = value(a, "logsumexp_row");
    double mx = A.maxCoeff();
    double lse = std::log((A.array() - mx).exp().sum()) + mx;
    Matrix out(1, 1);
    out(0, 0) = lse;
    require_finite("logsumexp_row", out);
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (!t.nodes_[nd.in[0]].needs_grad) return;
                  const Matrix& A = t.nodes_[nd.in[0]].value;
                  Matrix s = stable_softmax(A);
                  t.grad_of(nd.in[0]) += nd.grad(0, 0) * s;
                });
  }

  Var concat_cols(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.rows() != B.rows()) {
      throw DimensionError("concat_cols: " + shape_str(A) + " | " +
                           shape_str(B));
    }
    Matrix out(A.rows(), A.cols() + B.cols());
    out << A, B;
    return push(std::move(out), needs(a) || needs(b), a.id, b.id,
                [](Tape& t, const Node& nd) {
                  const Matrix& A = t.nodes_[nd.in[0]].value;
                  const Matrix& B = t.nodes_[nd.in[1]].value;
                  if (t.nodes_[nd.in[0]].needs_grad)
                    t.grad_of(nd.in[0]) += nd.grad.leftCols(A.cols());
                  if (t.nodes_[nd.in[1]].needs_grad)
                    t.grad_of(nd.in[1]) += nd.grad.rightCols(B.cols());
                });
  }

  Var transpose(Var a) {
    Matrix out = value(a).transpose();
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (t.nodes_[nd.in[0]].needs_grad)
                    t.grad_of(nd.in[0]) += nd.grad.transpose();
                });
  }

  Var sum_all(Var a) {
    Matrix out(1, 1);
    out(0, 0) = value(a).sum();
    require_finite("sum_all", out);
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (!t.nodes_[nd.in[0]].needs_grad) return;
                  t.grad_of(nd.in[0]).array() += nd.grad(0, 0);
                });
  }

  Var mean_all(Var a) {
    Matrix out(1, 1);
    out(0, 0) = value(a).mean();
    require_finite("mean_all", out);
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (!t.nodes_[nd.in[0]].needs_grad) return;
                  const Matrix& A = t.nodes_[nd.in[0]].value;
                  t.grad_of(nd.in[0]).array() +=
                      nd.grad(0, 0) / static_cast<double>(A.size());
                });
  }

  // Gradient is passed only where lo < x < hi; saturated entries get zero.
  Var clamp(Var a, double lo, double hi) {
    if (!(lo < hi)) throw ParameterError("clamp: lo must be < hi");
    Matrix out = value(a).cwiseMax(lo).cwiseMin(hi);
    return push(std::move(out), needs(a), a.id, npos,
                [lo, hi](Tape& t, const Node& nd) {
                  if (!t.nodes_[nd.in[0]].needs_grad) return;
                  const Matrix& A = t.nodes_[nd.in[0]].value;
                  t.grad_of(nd.in[0]).array() +=
                      nd.grad.array() *
                      ((A.array() > lo) && (A.array() < hi)).cast<double>();
                });
  }

  // Forward emits 1[x > threshold]; backward is the identity, i.e. the
  // straight-through estimator: hard samples in the forward pass, the soft
  // relaxation's gradient in the backward pass.
  Var hard_threshold_st(Var a, double threshold = 0.5) {
    Matrix out =
        (value(a).array() > threshold).cast<double>();
    return push(std::move(out), needs(a), a.id, npos,
                [](Tape& t, const Node& nd) {
                  if (t.nodes_[nd.in[0]].needs_grad)
                    t.grad_of(nd.in[0]) += nd.grad;
                });
  }

  // ----- access -----

  const Matrix& value(Var v) const {
    check_var(v);
    return nodes_[v.id].value;
  }

  double scalar(Var v) const {
    const Matrix& m = value(v);
    if (m.rows() != 1 || m.cols() != 1) {
      throw DimensionError("scalar: node is " + shape_str(m) + ", not 1x1");
    }
    return m(0, 0);
  }

  std::size_t size() const { return nodes_.size(); }

  // ----- backward -----

  // Accumulates d(root)/d(entry) into every bound ParameterStore.
  void backward(Var root, double seed = 1.0) { backward(root, {}, seed); }

  // Restricted variant: only stores listed in `into` receive gradients (an
  // empty list means all). Used to route the combined loss to the modifier
  // parameters and the label loss to the classifier.
  void backward(Var root, const std::vector<const ParameterStore*>& into,
                double seed = 1.0) {
    if (nodes_.empty() || !root.valid() || root.id >= nodes_.size()) {
      throw UsageError("backward: no recorded forward for this root");
    }
    if (nodes_[root.id].value.rows() != 1 ||
        nodes_[root.id].value.cols() != 1) {
      throw UsageError("backward: root must be a 1x1 scalar");
    }
    for (Node& nd : nodes_) nd.grad.resize(0, 0);
    grad_of(root.id)(0, 0) = seed;
    for (std::size_t id = root.id + 1; id-- > 0;) {
      Node& nd = nodes_[id];
      if (!nd.needs_grad || nd.grad.size() == 0) continue;
      if (nd.store != nullptr) {
        if (into.empty() || contains(into, nd.store)) {
          nd.store->accumulate_grad(nd.param_name, nd.grad);
        }
        continue;
      }
      if (nd.pull) nd.pull(*this, nd);
    }
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;  // empty until touched by a backward sweep
    bool needs_grad = false;
    std::array<std::size_t, 2> in = {npos, npos};
    std::function<void(Tape&, const Node&)> pull;
    ParameterStore* store = nullptr;
    std::string param_name;
  };

  static Matrix stable_softmax(const Matrix& a) {
    double mx = a.maxCoeff();
    Matrix e = (a.array() - mx).exp();
    return e / e.sum();
  }

  const Matrix& value(Var v, const char* op) const {
    const Matrix& m = value(v);
    if (m.rows() != 1) {
      throw DimensionError(std::string(op) + ": expects a 1xm row, got " +
                           shape_str(m));
    }
    return m;
  }

  void check_var(Var v) const {
    if (!v.valid() || v.id >= nodes_.size()) {
      throw UsageError("invalid tape variable");
    }
  }

  bool needs(Var v) const {
    check_var(v);
    return nodes_[v.id].needs_grad;
  }

  Matrix& grad_of(std::size_t id) {
    Node& nd = nodes_[id];
    if (nd.grad.size() == 0) {
      nd.grad = Matrix::Zero(nd.value.rows(), nd.value.cols());
    }
    return nd.grad;
  }

  static bool contains(const std::vector<const ParameterStore*>& v,
                       const ParameterStore* p) {
    for (const ParameterStore* q : v) {
      if (q == p) return true;
    }
    return false;
  }

  Var push(Matrix value, bool needs_grad, std::size_t a, std::size_t b,
           std::function<void(Tape&, const Node&)> pull) {
    Node nd;
    nd.value = std::move(value);
    nd.needs_grad = needs_grad;
    nd.in = {a, b};
    nd.pull = std::move(pull);
    nodes_.push_back(std::move(nd));
    return Var{nodes_.size() - 1};
  }

  std::vector<Node> nodes_;
};

}  // namespace dlg
