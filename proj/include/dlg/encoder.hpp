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

#include <cmath>
#include <string>

#include "dlg/graph.hpp"
#include "dlg/param_store.hpp"
#include "dlg/rng.hpp"
#include "dlg/tape.hpp"

namespace dlg {

enum class Activation { Relu, Tanh };

inline std::string activation_name(Activation a) {
  return a == Activation::Relu ? "relu" : "tanh";
}

inline Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw ParameterError("unknown activation '" + s + "'");
}

// Symmetric-normalized graph convolution stack. The same shape serves the
// invariant-side encoder, the label-aware augmentation encoder (input_dim is
// d_x + C there) and the classifier backbone.
struct GnnConfig {
  int layers = 2;
  int hidden_dim = 64;
  Activation activation = Activation::Relu;
  int input_dim = 0;
};

inline void validate_gnn_config(const GnnConfig& cfg) {
  if (cfg.layers < 1) throw ParameterError("gnn: layers must be >= 1");
  if (cfg.hidden_dim < 1) throw ParameterError("gnn: hidden_dim must be >= 1");
  if (cfg.input_dim < 1) throw ParameterError("gnn: input_dim must be >= 1");
}

// Graph-level representation produced by mean readout, optionally L2
// normalized.
struct GraphRepr {
  Matrix vector;  // 1 x d
  bool normalized = false;
};

// Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], filled in
// row-major order.
inline Matrix init_weight(int rows, int cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Matrix w(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) w(r, c) = rng.uniform(-bound, bound);
  }
  return w;
}

inline void init_gnn_params(ParameterStore& store, const std::string& prefix,
                            const GnnConfig& cfg, Rng& rng) {
  validate_gnn_config(cfg);
  int in_dim = cfg.input_dim;
  for (int l = 0; l < cfg.layers; ++l) {
    store.add(prefix + ".l" + std::to_string(l) + ".w",
              init_weight(in_dim, cfg.hidden_dim, rng));
    store.add(prefix + ".l" + std::to_string(l) + ".b",
              init_weight(1, cfg.hidden_dim, rng));
    in_dim = cfg.hidden_dim;
  }
}

// Appends the one-hot label to every feature row: n x d_x -> n x (d_x + C).
inline Matrix label_concat(const Matrix& features, int label,
                           int num_classes) {
  if (label < 0 || label >= num_classes) {
    throw ParameterError("label_concat: label " + std::to_string(label) +
                         " out of range [0," + std::to_string(num_classes) +
                         ")");
  }
  Matrix out(features.rows(), features.cols() + num_classes);
  out.leftCols(features.cols()) = features;
  out.rightCols(num_classes).setZero();
  out.col(features.cols() + label).setOnes();
  return out;
}

// Dhat^{-1/2} (A + I) Dhat^{-1/2} with degrees taken from the possibly
// fractional weights of A + I. Differentiable in A, so gradients reach the
// edge sampler when the input adjacency was itself sampled.
inline Tape::Var normalized_adjacency(Tape& t, Tape::Var adjacency) {
  const Eigen::Index n = t.value(adjacency).rows();
  if (t.value(adjacency).cols() != n) {
    throw DimensionError("normalized_adjacency: adjacency must be square");
  }
  Tape::Var with_loops =
      t.add(adjacency, t.constant(Matrix::Identity(n, n)));
  Tape::Var degrees = t.row_sum(with_loops);  // >= 1, log is safe
  Tape::Var inv_sqrt = t.exp_(t.scale(t.log_(degrees), -0.5));
  Tape::Var scaling = t.matmul(inv_sqrt, t.transpose(inv_sqrt));
  return t.hadamard(with_loops, scaling);
}

// `layers` rounds of propagation H <- act(P H W); the final layer is linear.
inline Tape::Var gnn_encode(Tape& t, Tape::Var adjacency, Tape::Var features,
                            const GnnConfig& cfg, ParameterStore& store,
                            const std::string& prefix) {
  validate_gnn_config(cfg);
  if (t.value(features).cols() != cfg.input_dim) {
    throw DimensionError("gnn_encode: features are " +
                         shape_str(t.value(features)) + ", expected input dim " +
                         std::to_string(cfg.input_dim));
  }
  Tape::Var prop = normalized_adjacency(t, adjacency);
  Tape::Var h = features;
  for (int l = 0; l < cfg.layers; ++l) {
    Tape::Var w = t.param(store, prefix + ".l" + std::to_string(l) + ".w");
    Tape::Var b = t.param(store, prefix + ".l" + std::to_string(l) + ".b");
    h = t.add_rowvec(t.matmul(t.matmul(prop, h), w), b);
    if (l + 1 < cfg.layers) {
      h = (cfg.activation == Activation::Relu) ? t.relu(h) : t.tanh_(h);
    }
  }
  return h;
}

// Plain-matrix encode for inference paths; runs the same math on a scratch
// tape.
inline Matrix gnn_encode(const Matrix& adjacency, const Matrix& features,
                         const GnnConfig& cfg, ParameterStore& store,
                         const std::string& prefix) {
  Tape t;
  return t.value(gnn_encode(t, t.constant(adjacency), t.constant(features),
                            cfg, store, prefix));
}

inline GraphRepr readout_mean(const Matrix& node_embeddings) {
  if (node_embeddings.rows() < 1) {
    throw DimensionError("readout_mean: needs at least one node");
  }
  GraphRepr r;
  r.vector = node_embeddings.colwise().mean();
  r.normalized = false;
  return r;
}

inline GraphRepr l2_normalize(const GraphRepr& r) {
  GraphRepr out = r;
  double n = out.vector.norm();
  if (n > 0.0) out.vector /= n;
  out.normalized = true;
  return out;
}

// ----- classifier -----

inline void init_classifier_params(ParameterStore& store, const GnnConfig& cfg,
                                   int num_classes, Rng& rng) {
  init_gnn_params(store, "gnn", cfg, rng);
  store.add("head.w", init_weight(cfg.hidden_dim, num_classes, rng));
  store.add("head.b", init_weight(1, num_classes, rng));
}

// Pre-softmax class scores: backbone -> mean readout -> linear head.
inline Tape::Var classifier_logits(Tape& t, Tape::Var adjacency,
                                   Tape::Var features, const GnnConfig& cfg,
                                   ParameterStore& store) {
  Tape::Var h = gnn_encode(t, adjacency, features, cfg, store, "gnn");
  Tape::Var pooled = t.mean_rows(h);
  return t.add_rowvec(t.matmul(pooled, t.param(store, "head.w")),
                      t.param(store, "head.b"));
}

// Class-probability vector over a (possibly weighted) graph.
inline Matrix classify(const Matrix& adjacency, const Matrix& features,
                       const GnnConfig& cfg, ParameterStore& store) {
  Tape t;
  Tape::Var z = classifier_logits(t, t.constant(adjacency),
                                  t.constant(features), cfg, store);
  return t.value(t.softmax_row(z));
}

inline Matrix classify(const Graph& g, const GnnConfig& cfg,
                       ParameterStore& store) {
  return classify(g.adjacency, g.features, cfg, store);
}

inline int argmax_class(const Matrix& probs) {
  Eigen::Index best = 0;
  probs.row(0).maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace dlg
