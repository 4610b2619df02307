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
#include <vector>

#include "dlg/matrix.hpp"

namespace dlg {

// One graph sample: symmetric adjacency (0/1 for raw data, fractional weights
// after modification), dense node features, class label.
struct Graph {
  int n = 0;
  Matrix adjacency;  // n x n, symmetric, zero diagonal, entries in [0,1]
  Matrix features;   // n x d_x
  int label = 0;     // in [0, C)
};

inline void validate_graph(const Graph& g, int num_classes) {
  if (g.n < 1) throw ParameterError("graph: node count must be >= 1");
  if (g.adjacency.rows() != g.n || g.adjacency.cols() != g.n) {
    throw DimensionError("graph: adjacency is " + shape_str(g.adjacency) +
                         ", expected " + std::to_string(g.n) + "x" +
                         std::to_string(g.n));
  }
  if (g.features.rows() != g.n) {
    throw DimensionError("graph: features have " +
                         std::to_string(g.features.rows()) + " rows for " +
                         std::to_string(g.n) + " nodes");
  }
  if (!is_valid_adjacency(g.adjacency)) {
    throw ParameterError(
        "graph: adjacency must be symmetric, zero-diagonal, entries in [0,1]");
  }
  require_finite("graph features", g.features);
  if (g.label < 0 || g.label >= num_classes) {
    throw ParameterError("graph: label " + std::to_string(g.label) +
                         " out of range [0," + std::to_string(num_classes) +
                         ")");
  }
}

// An ordered collection of graphs sharing C and d_x. Immutable once built.
struct Dataset {
  std::vector<Graph> graphs;
  int num_classes = 0;
  int feature_dim = 0;
  std::string provenance;

  std::size_t size() const { return graphs.size(); }
};

inline void validate_dataset(const Dataset& ds) {
  if (ds.num_classes < 1) throw DatasetError("dataset: num_classes must be >= 1");
  if (ds.feature_dim < 1) throw DatasetError("dataset: feature_dim must be >= 1");
  std::vector<int> class_counts(static_cast<std::size_t>(ds.num_classes), 0);
  for (const Graph& g : ds.graphs) {
    validate_graph(g, ds.num_classes);
    if (g.features.cols() != ds.feature_dim) {
      throw SchemaError("dataset: graph feature dim " +
                        std::to_string(g.features.cols()) +
                        " != dataset d_x " + std::to_string(ds.feature_dim));
    }
    ++class_counts[static_cast<std::size_t>(g.label)];
  }
  for (int c = 0; c < ds.num_classes; ++c) {
    if (class_counts[static_cast<std::size_t>(c)] == 0) {
      throw DatasetError("dataset: class " + std::to_string(c) +
                         " has no graphs");
    }
  }
}

enum class Family { Spmotif, Tpg };

inline std::string family_name(Family f) {
  return f == Family::Spmotif ? "spmotif" : "tpg";
}

inline Family parse_family(const std::string& s) {
  if (s == "spmotif") return Family::Spmotif;
  if (s == "tpg") return Family::Tpg;
  throw ParameterError("unknown dataset family '" + s + "'");
}

// Generator request: which family, how strongly the spurious piece tracks the
// label in training data, and the split sizes. For spmotif, bias is the
// probability that the base matches the label-aligned choice, in [1/3, 1].
// For tpg, bias is a signed correlation in [-0.2, +0.2] mapped to alignment
// probability 1/3 + bias.
struct BiasSpec {
  Family family = Family::Spmotif;
  double bias = 1.0 / 3.0;
  int train_size = 600;
  int test_size = 300;
  int feature_dim = 4;
};

inline void validate_bias_spec(const BiasSpec& spec) {
  if (spec.family == Family::Spmotif) {
    if (spec.bias < 1.0 / 3.0 - 1e-12 || spec.bias > 1.0 + 1e-12) {
      throw ParameterError("spmotif bias must be in [1/3, 1]");
    }
  } else {
    if (spec.bias < -0.2 - 1e-12 || spec.bias > 0.2 + 1e-12) {
      throw ParameterError("tpg bias must be in [-0.2, +0.2]");
    }
  }
  if (spec.train_size < 1 || spec.test_size < 1) {
    throw ParameterError("bias spec: split sizes must be >= 1");
  }
  if (spec.feature_dim < 1) {
    throw ParameterError("bias spec: feature_dim must be >= 1");
  }
}

}  // namespace dlg
