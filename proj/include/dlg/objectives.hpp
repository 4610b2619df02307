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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dlg/encoder.hpp"
#include "dlg/graph.hpp"
#include "dlg/rng.hpp"
#include "dlg/tape.hpp"

namespace dlg {

// Per-step sample of labeled graphs acting as positives/negatives for the
// distribution-consistency loss. Default mode holds exactly one graph per
// class; larger or fractional K trades coverage for cost but always keeps at
// least one member sharing the anchor's label.
struct SupportSet {
  std::vector<std::size_t> indices;  // into the source dataset
  std::vector<int> labels;
  std::vector<GraphRepr> reps;  // unit-norm, filled by compute_support_reps
};

// Class-stratified sampling of round(K*C) members (exactly one per class when
// K = 1), guaranteeing a member labeled anchor_label.
inline SupportSet support_set_sample(const Dataset& ds, double K,
                                     int anchor_label, Rng& rng) {
  if (K < 0.0) throw ParameterError("support set: K must be >= 0");
  if (anchor_label < 0 || anchor_label >= ds.num_classes) {
    throw ParameterError("support set: anchor label out of range");
  }
  const int C = ds.num_classes;
  std::vector<std::vector<std::size_t>> by_class(
      static_cast<std::size_t>(C));
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    by_class[static_cast<std::size_t>(ds.graphs[i].label)].push_back(i);
  }
  for (int c = 0; c < C; ++c) {
    if (by_class[static_cast<std::size_t>(c)].empty()) {
      throw DatasetError("support set: class " + std::to_string(c) +
                         " is empty");
    }
  }

  const int total = std::max(
      1, static_cast<int>(std::llround(K * static_cast<double>(C))));
  std::vector<int> counts(static_cast<std::size_t>(C), total / C);
  int remainder = total % C;
  if (remainder > 0) {
    // Remainder goes to `remainder` distinct classes, chosen uniformly.
    std::vector<int> order(static_cast<std::size_t>(C));
    for (int c = 0; c < C; ++c) order[static_cast<std::size_t>(c)] = c;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_index(i)]);
    }
    for (int k = 0; k < remainder; ++k) {
      ++counts[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
    }
  }
  if (counts[static_cast<std::size_t>(anchor_label)] == 0) {
    // Move one slot to the anchor's class from the fullest class.
    int donor = 0;
    for (int c = 1; c < C; ++c) {
      if (counts[static_cast<std::size_t>(c)] >
          counts[static_cast<std::size_t>(donor)]) {
        donor = c;
      }
    }
    --counts[static_cast<std::size_t>(donor)];
    ++counts[static_cast<std::size_t>(anchor_label)];
  }

  SupportSet s;
  for (int c = 0; c < C; ++c) {
    const auto& pool = by_class[static_cast<std::size_t>(c)];
    for (int k = 0; k < counts[static_cast<std::size_t>(c)]; ++k) {
      s.indices.push_back(pool[rng.uniform_index(pool.size())]);
      s.labels.push_back(c);
    }
  }
  return s;
}

// Fills reps with the unit-norm mean readout of the label-aware encoder on
// each member graph.
inline void compute_support_reps(SupportSet& s, const Dataset& ds,
                                 ParameterStore& store, const GnnConfig& cfg) {
  s.reps.clear();
  for (std::size_t k = 0; k < s.indices.size(); ++k) {
    const Graph& g = ds.graphs[s.indices[k]];
    Matrix h = gnn_encode(
        g.adjacency, label_concat(g.features, g.label, ds.num_classes), cfg,
        store, "gnn");
    s.reps.push_back(l2_normalize(readout_mean(h)));
  }
}

namespace detail {

inline void require_unit(const char* op, const Matrix& v) {
  if (v.rows() != 1) {
    throw PreconditionError(std::string(op) + ": expected a row vector");
  }
  if (std::abs(v.norm() - 1.0) > 1e-9) {
    throw PreconditionError(std::string(op) + ": vector is not unit-norm");
  }
}

inline void require_probability(const char* op, const Matrix& q) {
  if (q.rows() != 1) {
    throw PreconditionError(std::string(op) + ": expected a row vector");
  }
  if (q.minCoeff() < -1e-12 || std::abs(q.sum() - 1.0) > 1e-9) {
    throw PreconditionError(std::string(op) +
                            ": input is not a probability vector");
  }
}

}  // namespace detail

// Membership probabilities p(G_i | G_a): softmax over negative squared
// embedding distances. For unit vectors (h_a - h_i)^2 = 2 - 2 h_a.h_i, so
// this is computed as a softmax over 2 h_a.h_i (softmax is shift-invariant).
inline Matrix membership_prob(const Matrix& h_a,
                              const std::vector<GraphRepr>& supports) {
  detail::require_unit("membership_prob", h_a);
  if (supports.empty()) {
    throw PreconditionError("membership_prob: empty support set");
  }
  Matrix scores(1, static_cast<Eigen::Index>(supports.size()));
  for (std::size_t i = 0; i < supports.size(); ++i) {
    detail::require_unit("membership_prob", supports[i].vector);
    scores(0, static_cast<Eigen::Index>(i)) =
        2.0 * h_a.row(0).dot(supports[i].vector.row(0));
  }
  Tape t;
  return t.value(t.softmax_row(t.constant(scores)));
}

enum class LdForm { Contrastive, PaperLiteral };

inline std::string ld_form_name(LdForm f) {
  return f == LdForm::Contrastive ? "contrastive" : "paper-literal";
}

inline LdForm parse_ld_form(const std::string& s) {
  if (s == "contrastive") return LdForm::Contrastive;
  if (s == "paper-literal") return LdForm::PaperLiteral;
  throw ParameterError("unknown ld_form '" + s + "'");
}

namespace detail {

inline Tape::Var dot2(Tape& t, Tape::Var a, Tape::Var b) {
  return t.scale(t.sum_all(t.hadamard(a, b)), 2.0);
}

}  // namespace detail

// Distribution-consistency loss. With unit-norm representations and
// similarity s_i = 2 h_a.h_i, the contrastive form is
//   L_d = -sum_{i: y_i = Y} s_i + log(exp(2 h_a.h_v) + sum_j exp(s_j)),
// pulling the augmentation representation toward same-label support graphs
// and away from differently labeled ones and from the invariant graph. The
// paper-literal form flips the sign of the log term.
inline Tape::Var distribution_loss_tape(Tape& t, Tape::Var h_a, Tape::Var h_v,
                                        const std::vector<Tape::Var>& reps,
                                        const std::vector<int>& labels,
                                        int anchor_label, LdForm form) {
  if (reps.empty() || reps.size() != labels.size()) {
    throw PreconditionError("distribution_loss: malformed support set");
  }
  Tape::Var positives;
  bool have_positive = false;
  Tape::Var all_scores = detail::dot2(t, h_a, h_v);  // 1x1, grows by concat
  for (std::size_t i = 0; i < reps.size(); ++i) {
    Tape::Var s = detail::dot2(t, h_a, reps[i]);
    all_scores = t.concat_cols(all_scores, s);
    if (labels[i] == anchor_label) {
      positives = have_positive ? t.add(positives, s) : s;
      have_positive = true;
    }
  }
  if (!have_positive) {
    throw SamplingContractError(
        "distribution_loss: no support member shares the anchor label");
  }
  Tape::Var lse = t.logsumexp_row(all_scores);
  if (form == LdForm::Contrastive) return t.sub(lse, positives);
  return t.scale(t.add(positives, lse), -1.0);
}

// Plain-value form over precomputed unit representations.
inline double distribution_loss(const Matrix& h_a, const Matrix& h_v,
                                const std::vector<GraphRepr>& reps,
                                const std::vector<int>& labels,
                                int anchor_label, LdForm form) {
  detail::require_unit("distribution_loss", h_a);
  detail::require_unit("distribution_loss", h_v);
  Tape t;
  std::vector<Tape::Var> rep_vars;
  rep_vars.reserve(reps.size());
  for (const GraphRepr& r : reps) {
    detail::require_unit("distribution_loss", r.vector);
    rep_vars.push_back(t.constant(r.vector));
  }
  return t.scalar(distribution_loss_tape(t, t.constant(h_a), t.constant(h_v),
                                         rep_vars, labels, anchor_label,
                                         form));
}

// Label-consistency loss L_c = -( log q_v(Y) + sum_i q_v(i) log q_a(i) ):
// cross-entropy of the invariant graph's prediction against the label, plus
// cross-entropy of the augmented graph's prediction against the invariant
// one. Convention 0*log 0 = 0; logs of active zero terms clamp at 1e-12.
inline double label_loss(const Matrix& q_v, const Matrix& q_a,
                         int anchor_label) {
  detail::require_probability("label_loss", q_v);
  detail::require_probability("label_loss", q_a);
  require_same_shape("label_loss", q_v, q_a);
  const Eigen::Index C = q_v.cols();
  if (anchor_label < 0 || anchor_label >= C) {
    throw ParameterError("label_loss: label out of range");
  }
  const double floor = 1e-12;
  double total = std::log(std::max(q_v(0, anchor_label), floor));
  for (Eigen::Index i = 0; i < C; ++i) {
    if (q_v(0, i) > 0.0) {
      total += q_v(0, i) * std::log(std::max(q_a(0, i), floor));
    }
  }
  return -total;
}

// Training-path variant on logits, keeping log on the fused log-softmax path.
// With detach_target the probabilities of the invariant graph act as a fixed
// target in the second term (no gradient through q_v there).
inline Tape::Var label_loss_tape(Tape& t, Tape::Var logits_v,
                                 Tape::Var logits_a, int anchor_label,
                                 int num_classes, bool detach_target) {
  if (anchor_label < 0 || anchor_label >= num_classes) {
    throw ParameterError("label_loss: label out of range");
  }
  Matrix onehot = Matrix::Zero(1, num_classes);
  onehot(0, anchor_label) = 1.0;
  Tape::Var log_qv = t.log_softmax_row(logits_v);
  Tape::Var log_qa = t.log_softmax_row(logits_a);
  Tape::Var qv = t.softmax_row(logits_v);
  if (detach_target) qv = t.constant(t.value(qv));
  Tape::Var term1 = t.sum_all(t.hadamard(log_qv, t.constant(onehot)));
  Tape::Var term2 = t.sum_all(t.hadamard(qv, log_qa));
  return t.scale(t.add(term1, term2), -1.0);
}

// Simplified mutual-information surrogate,
//   (1/C) sum_{i: y_i = Y} log p(G_i | G_a),
// evaluated brute force from membership probabilities. Used as a directional
// oracle: training moves that improve the contrastive loss should increase
// this quantity.
inline double mi_surrogate_oracle(const Matrix& h_a,
                                  const std::vector<GraphRepr>& reps,
                                  const std::vector<int>& labels,
                                  int anchor_label, int num_classes) {
  if (reps.size() != labels.size() || reps.empty()) {
    throw PreconditionError("mi_surrogate_oracle: malformed support set");
  }
  Matrix probs = membership_prob(h_a, reps);
  double total = 0.0;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    if (labels[i] == anchor_label) {
      total += std::log(probs(0, static_cast<Eigen::Index>(i)));
    }
  }
  return total / static_cast<double>(num_classes);
}

// Per-step loss values; `combined` is the modifier objective actually used.
struct LossBundle {
  double ld = 0.0;
  double lc = 0.0;
  double combined = 0.0;
};

}  // namespace dlg
