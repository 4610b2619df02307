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

#include <utility>
#include <vector>

#include "dlg/graph.hpp"
#include "dlg/motifs.hpp"
#include "dlg/rng.hpp"
#include "dlg/text.hpp"

namespace dlg {

// Bookkeeping emitted alongside each generated graph so calibration tests can
// count spurious-piece alignment without re-deriving it from topology.
struct GenMeta {
  int label = 0;
  int causal_kind = 0;    // index into the causal shape family
  int spurious_kind = 0;  // index into the spurious shape family
  bool aligned = false;   // spurious piece matches the label-aligned choice
};

struct GeneratedSplit {
  Dataset data;
  std::vector<GenMeta> meta;
};

struct GeneratedPair {
  GeneratedSplit train;
  GeneratedSplit test;
};

namespace detail {

// Joins two fragments with exactly one bridge edge between a uniform node of
// each piece; the result is connected whenever both pieces are.
inline Graph join_pieces(const MotifFragment& first,
                         const MotifFragment& second, int label,
                         int feature_dim, Rng& rng) {
  const int n = first.n + second.n;
  Graph g;
  g.n = n;
  g.label = label;
  g.adjacency = Matrix::Zero(n, n);
  g.adjacency.topLeftCorner(first.n, first.n) = first.adjacency;
  g.adjacency.bottomRightCorner(second.n, second.n) = second.adjacency;
  const int a = static_cast<int>(rng.uniform_index(
      static_cast<std::size_t>(first.n)));
  const int b = first.n + static_cast<int>(rng.uniform_index(
                              static_cast<std::size_t>(second.n)));
  g.adjacency(a, b) = 1.0;
  g.adjacency(b, a) = 1.0;
  // Features are pure noise; labels are decided by structure alone. Filled
  // in row-major order so the draw sequence is part of the contract.
  g.features = Matrix(n, feature_dim);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < feature_dim; ++c) {
      g.features(r, c) = rng.uniform(-1.0, 1.0);
    }
  }
  return g;
}

// Picks the spurious piece: the label-aligned choice with probability
// p_aligned, otherwise uniform over the other two.
inline int pick_spurious(int label, double p_aligned, Rng& rng,
                         bool* aligned_out) {
  if (rng.uniform() < p_aligned) {
    *aligned_out = true;
    return label;
  }
  int other = static_cast<int>(rng.uniform_index(2));
  int pick = (other >= label) ? other + 1 : other;
  *aligned_out = (pick == label);  // always false here
  return pick;
}

}  // namespace detail

// Three-class structural benchmark: label-deciding motif in
// {cycle, house, crane} joined by one bridge edge to a large base in
// {tree, ladder, wheel}. In training data the base matches the label-aligned
// kind with probability `bias`; test bases are uniform.
inline GeneratedSplit generate_spmotif_split(const BiasSpec& spec, int count,
                                             bool biased, Rng& master,
                                             std::uint64_t index_offset) {
  static const MotifKind kMotifs[3] = {MotifKind::Cycle, MotifKind::House,
                                       MotifKind::Crane};
  static const MotifKind kBases[3] = {MotifKind::Tree, MotifKind::Ladder,
                                      MotifKind::Wheel};
  GeneratedSplit split;
  split.data.num_classes = 3;
  split.data.feature_dim = spec.feature_dim;
  split.data.graphs.reserve(static_cast<std::size_t>(count));
  split.meta.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng = master.spawn(index_offset + static_cast<std::uint64_t>(i));
    GenMeta meta;
    meta.label = i % 3;  // balanced within +-1 per class
    meta.causal_kind = meta.label;
    if (biased) {
      meta.spurious_kind =
          detail::pick_spurious(meta.label, spec.bias, rng, &meta.aligned);
    } else {
      meta.spurious_kind = static_cast<int>(rng.uniform_index(3));
      meta.aligned = (meta.spurious_kind == meta.label);
    }
    MotifKind base_kind = kBases[meta.spurious_kind];
    MotifKind motif_kind = kMotifs[meta.causal_kind];
    MotifFragment base =
        make_motif(base_kind, default_motif_size(base_kind), rng);
    MotifFragment motif =
        make_motif(motif_kind, default_motif_size(motif_kind), rng);
    split.data.graphs.push_back(detail::join_pieces(
        base, motif, meta.label, spec.feature_dim, rng));
    split.meta.push_back(meta);
  }
  return split;
}

inline GeneratedPair generate_spmotif(const BiasSpec& spec, Rng& rng) {
  if (spec.family != Family::Spmotif) {
    throw ParameterError("generate_spmotif: spec.family must be spmotif");
  }
  validate_bias_spec(spec);
  GeneratedPair pair;
  pair.train = generate_spmotif_split(spec, spec.train_size, true, rng, 0);
  pair.test = generate_spmotif_split(
      spec, spec.test_size, false, rng,
      static_cast<std::uint64_t>(spec.train_size));
  const std::string stem = "spmotif bias=" + to_shortest(spec.bias) +
                           " seed=" + std::to_string(rng.seed()) +
                           " d_x=" + std::to_string(spec.feature_dim);
  pair.train.data.provenance = stem + " split=train";
  pair.test.data.provenance = stem + " split=test";
  return pair;
}

// Two-piece graphs: a causal motif in {cycle, house, crane} deciding the
// 3-class label, attached to a small spurious piece in
// {triangle, star, clique}. The signed correlation knob maps linearly to the
// alignment probability 1/3 + bias, so bias 0 is the uniform point.
inline GeneratedSplit generate_tpg_split(const BiasSpec& spec, int count,
                                         bool biased, Rng& master,
                                         std::uint64_t index_offset) {
  static const MotifKind kCausal[3] = {MotifKind::Cycle, MotifKind::House,
                                       MotifKind::Crane};
  GeneratedSplit split;
  split.data.num_classes = 3;
  split.data.feature_dim = spec.feature_dim;
  split.data.graphs.reserve(static_cast<std::size_t>(count));
  split.meta.reserve(static_cast<std::size_t>(count));
  const double p_aligned = biased ? (1.0 / 3.0 + spec.bias) : 1.0 / 3.0;
  for (int i = 0; i < count; ++i) {
    Rng rng = master.spawn(index_offset + static_cast<std::uint64_t>(i));
    GenMeta meta;
    meta.label = i % 3;
    meta.causal_kind = meta.label;
    if (biased) {
      meta.spurious_kind =
          detail::pick_spurious(meta.label, p_aligned, rng, &meta.aligned);
    } else {
      meta.spurious_kind = static_cast<int>(rng.uniform_index(3));
      meta.aligned = (meta.spurious_kind == meta.label);
    }
    MotifFragment spurious = [&]() {
      switch (meta.spurious_kind) {
        case 0: return make_motif(MotifKind::Cycle, 3, rng);  // triangle
        case 1: {                                             // star
          MotifFragment f;
          f.n = 4;
          f.adjacency = Matrix::Zero(4, 4);
          for (int leaf = 1; leaf < 4; ++leaf) {
            f.adjacency(0, leaf) = 1.0;
            f.adjacency(leaf, 0) = 1.0;
          }
          return f;
        }
        default: {  // 4-clique
          MotifFragment f;
          f.n = 4;
          f.adjacency = Matrix::Ones(4, 4);
          f.adjacency.diagonal().setZero();
          return f;
        }
      }
    }();
    MotifKind causal_kind = kCausal[meta.causal_kind];
    MotifFragment causal =
        make_motif(causal_kind, default_motif_size(causal_kind), rng);
    split.data.graphs.push_back(detail::join_pieces(
        causal, spurious, meta.label, spec.feature_dim, rng));
    split.meta.push_back(meta);
  }
  return split;
}

inline GeneratedPair generate_tpg(const BiasSpec& spec, Rng& rng) {
  if (spec.family != Family::Tpg) {
    throw ParameterError("generate_tpg: spec.family must be tpg");
  }
  validate_bias_spec(spec);
  GeneratedPair pair;
  pair.train = generate_tpg_split(spec, spec.train_size, true, rng, 0);
  pair.test = generate_tpg_split(spec, spec.test_size, false, rng,
                                 static_cast<std::uint64_t>(spec.train_size));
  const std::string stem = "tpg bias=" + to_shortest(spec.bias) +
                           " seed=" + std::to_string(rng.seed()) +
                           " d_x=" + std::to_string(spec.feature_dim);
  pair.train.data.provenance = stem + " split=train";
  pair.test.data.provenance = stem + " split=test";
  return pair;
}

inline GeneratedPair generate(const BiasSpec& spec, Rng& rng) {
  return spec.family == Family::Spmotif ? generate_spmotif(spec, rng)
                                        : generate_tpg(spec, rng);
}

}  // namespace dlg
