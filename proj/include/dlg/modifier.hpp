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

#include <string>

#include "dlg/encoder.hpp"
#include "dlg/graph.hpp"
#include "dlg/param_store.hpp"
#include "dlg/rng.hpp"
#include "dlg/tape.hpp"

namespace dlg {

// Per-pair sampling probabilities over the full candidate set of unordered
// node pairs; the modifier may therefore also create edges that are absent
// from the input graph. probs = sigmoid(logits) off the diagonal, diagonal
// forced to zero, symmetric because logits come from a dot product.
struct EdgeMask {
  Matrix probs;
  Matrix logits;
};

// Edge-scorer MLP widths: d_h -> hidden -> out, relu between.
struct ScorerConfig {
  int hidden = 64;
  int out = 32;
};

// One modifier = a GNN encoder plus an edge scorer.
struct ModifierConfig {
  GnnConfig gnn;
  ScorerConfig scorer;
};

inline void init_scorer_params(ParameterStore& store,
                               const std::string& prefix, int embed_dim,
                               const ScorerConfig& cfg, Rng& rng) {
  if (cfg.hidden < 1 || cfg.out < 1) {
    throw ParameterError("scorer: widths must be >= 1");
  }
  store.add(prefix + ".l0.w", init_weight(embed_dim, cfg.hidden, rng));
  store.add(prefix + ".l0.b", init_weight(1, cfg.hidden, rng));
  store.add(prefix + ".l1.w", init_weight(cfg.hidden, cfg.out, rng));
  store.add(prefix + ".l1.b", init_weight(1, cfg.out, rng));
}

inline void init_modifier_params(ParameterStore& store,
                                 const ModifierConfig& cfg, Rng& rng) {
  init_gnn_params(store, "gnn", cfg.gnn, rng);
  init_scorer_params(store, "scorer", cfg.gnn.hidden_dim, cfg.scorer, rng);
}

// logits[i][j] = z_i . z_j with z = MLP_e(h); symmetric by construction.
inline Tape::Var edge_logits(Tape& t, Tape::Var node_embeddings,
                             ParameterStore& store,
                             const std::string& prefix = "scorer") {
  Tape::Var z = t.relu(
      t.add_rowvec(t.matmul(node_embeddings, t.param(store, prefix + ".l0.w")),
                   t.param(store, prefix + ".l0.b")));
  z = t.add_rowvec(t.matmul(z, t.param(store, prefix + ".l1.w")),
                   t.param(store, prefix + ".l1.b"));
  return t.matmul(z, t.transpose(z));
}

inline Matrix off_diagonal_ones(Eigen::Index n) {
  Matrix m = Matrix::Ones(n, n);
  m.diagonal().setZero();
  return m;
}

// Symmetric logistic noise, one draw per unordered pair consumed in
// row-major (i<j) order; diagonal zero.
inline Matrix gumbel_noise(int n, Rng& rng) {
  Matrix g = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double v = rng.logistic();
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

// Relaxed edge sampling: s = sigmoid((clamp(logits) + noise) / tau), diagonal
// zeroed. With hard=true the forward pass emits 1[s > 0.5] and gradients flow
// straight through the relaxation. P(hard edge) = sigmoid(logit) exactly,
// independent of tau.
inline Tape::Var sample_adjacency(Tape& t, Tape::Var logits,
                                  const Matrix& noise, double tau, bool hard) {
  if (!(tau > 0.0)) throw ParameterError("sample_adjacency: tau must be > 0");
  const Eigen::Index n = t.value(logits).rows();
  require_same_shape("sample_adjacency noise", t.value(logits), noise);
  // Keeps exp arguments bounded without capping the hard-sample marginal
  // noticeably: sigmoid(30) misses once in ~1e13 draws.
  Tape::Var clamped = t.clamp(logits, -30.0, 30.0);
  Tape::Var noisy = t.scale(t.add(clamped, t.constant(noise)), 1.0 / tau);
  Tape::Var soft = t.hadamard(t.sigmoid(noisy), t.constant(off_diagonal_ones(n)));
  return hard ? t.hard_threshold_st(soft) : soft;
}

// Deterministic mask weights, diagonal zeroed: used at inference in place of
// sampling.
inline Tape::Var mask_probs(Tape& t, Tape::Var logits) {
  const Eigen::Index n = t.value(logits).rows();
  return t.hadamard(t.sigmoid(logits), t.constant(off_diagonal_ones(n)));
}

// Mean off-diagonal binary cross-entropy between the mask and a target
// adjacency. Warmup-only: anchors freshly initialized masks to the input
// graph so edge sampling starts from graphs the classifier can read, instead
// of density-1/2 noise.
inline Tape::Var adjacency_reconstruction_loss(Tape& t, Tape::Var logits,
                                               const Matrix& target) {
  const Eigen::Index n = t.value(logits).rows();
  require_same_shape("adjacency_reconstruction_loss", t.value(logits), target);
  Matrix offdiag = off_diagonal_ones(n);
  Matrix absent = offdiag - target;  // off-diagonal non-edges
  Tape::Var bounded = t.clamp(logits, -30.0, 30.0);
  Tape::Var log_on = t.log_(t.sigmoid(bounded));
  Tape::Var log_off = t.log_(t.sigmoid(t.scale(bounded, -1.0)));
  Tape::Var ll = t.add(t.hadamard(log_on, t.constant(target)),
                       t.hadamard(log_off, t.constant(absent)));
  const double pairs = static_cast<double>(n * (n - 1));
  return t.scale(t.sum_all(ll), -1.0 / pairs);
}

// Plain-matrix mask from node embeddings.
inline EdgeMask edge_mask(const Matrix& node_embeddings, ParameterStore& store,
                          const std::string& prefix = "scorer") {
  Tape t;
  Tape::Var logits =
      edge_logits(t, t.constant(node_embeddings), store, prefix);
  EdgeMask mask;
  mask.logits = t.value(logits);
  mask.probs = t.value(mask_probs(t, logits));
  return mask;
}

// Plain-matrix sampling from a mask; draws its own noise.
inline Matrix gumbel_sigmoid_sample(const EdgeMask& mask, double tau,
                                    bool hard, Rng& rng) {
  Matrix noise = gumbel_noise(static_cast<int>(mask.logits.rows()), rng);
  Tape t;
  return t.value(
      sample_adjacency(t, t.constant(mask.logits), noise, tau, hard));
}

enum class ModifierMode { Train, Infer };

// Everything the trainer needs from one modifier pass, as live tape nodes.
struct ModifierTapeOut {
  Tape::Var embeddings;   // n x d_h
  Tape::Var repr;         // 1 x d_h, L2-normalized readout
  Tape::Var logits;       // n x n
  Tape::Var adjacency;    // sampled (train) or weighted (infer)
};

inline ModifierTapeOut modify_on_tape(Tape& t, Tape::Var adjacency,
                                      Tape::Var features,
                                      const ModifierConfig& cfg,
                                      ParameterStore& store, double tau,
                                      ModifierMode mode, const Matrix* noise) {
  ModifierTapeOut out;
  out.embeddings = gnn_encode(t, adjacency, features, cfg.gnn, store, "gnn");
  out.repr = t.l2_normalize_rows(t.mean_rows(out.embeddings));
  out.logits = edge_logits(t, out.embeddings, store, "scorer");
  if (mode == ModifierMode::Train) {
    if (noise == nullptr) {
      throw UsageError("modify_on_tape: train mode requires noise");
    }
    out.adjacency = sample_adjacency(t, out.logits, *noise, tau, true);
  } else {
    out.adjacency = mask_probs(t, out.logits);
  }
  return out;
}

// Learns the invariant counterpart of g: same nodes and features, adjacency
// resampled from the learned mask. Train mode draws hard samples; infer mode
// deterministically uses the mask weights, and never reads the label.
inline Graph build_invariant_graph(const Graph& g, ParameterStore& store,
                                   const ModifierConfig& cfg,
                                   ModifierMode mode, Rng& rng,
                                   double tau = 1.0) {
  Tape t;
  Matrix noise;
  const Matrix* noise_ptr = nullptr;
  if (mode == ModifierMode::Train) {
    noise = gumbel_noise(g.n, rng);
    noise_ptr = &noise;
  }
  ModifierTapeOut out =
      modify_on_tape(t, t.constant(g.adjacency), t.constant(g.features), cfg,
                     store, tau, mode, noise_ptr);
  Graph gv;
  gv.n = g.n;
  gv.adjacency = t.value(out.adjacency);
  gv.features = g.features;
  gv.label = g.label;
  return gv;
}

struct AugmentedGraph {
  Graph graph;
  GraphRepr repr;  // unit-norm readout of the label-aware embeddings
};

// Label-aware counterpart used only during training: the encoder sees
// X (+) one-hot(Y), edges are hard-sampled from the learned mask.
inline AugmentedGraph build_augmented_graph(const Graph& g,
                                            ParameterStore& store,
                                            const ModifierConfig& cfg,
                                            int num_classes, ModifierMode mode,
                                            Rng& rng, double tau = 1.0) {
  if (mode != ModifierMode::Train) {
    throw UsageError(
        "build_augmented_graph: labels are unavailable at inference");
  }
  Matrix noise = gumbel_noise(g.n, rng);
  Tape t;
  ModifierTapeOut out = modify_on_tape(
      t, t.constant(g.adjacency),
      t.constant(label_concat(g.features, g.label, num_classes)), cfg, store,
      tau, ModifierMode::Train, &noise);
  AugmentedGraph res;
  res.graph.n = g.n;
  res.graph.adjacency = t.value(out.adjacency);
  res.graph.features = g.features;
  res.graph.label = g.label;
  res.repr.vector = t.value(out.repr);
  res.repr.normalized = true;
  return res;
}

}  // namespace dlg
