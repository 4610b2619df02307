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

#include <gtest/gtest.h>

#include <cmath>

#include "dlg/encoder.hpp"
#include "test_support.hpp"

using dlg::GnnConfig;
using dlg::Matrix;
using dlg::ParameterStore;
using dlg::Rng;
using dlg::Tape;

namespace {

Matrix permutation_matrix(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  Matrix p = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) p(i, perm[static_cast<std::size_t>(i)]) = 1.0;
  return p;
}

}  // namespace

TEST(LabelConcat, AppendsOneHot) {
  Matrix x(1, 2);
  x << 1, 2;
  Matrix out = dlg::label_concat(x, 0, 2);
  Matrix expected(1, 4);
  expected << 1, 2, 1, 0;
  EXPECT_EQ(out, expected);
}

TEST(LabelConcat, RowsEndWithTheLabelVector) {
  Matrix x(2, 2);
  x << 0, 0, 3, 4;
  Matrix out = dlg::label_concat(x, 1, 3);
  ASSERT_EQ(out.cols(), 5);
  for (int r = 0; r < 2; ++r) {
    EXPECT_EQ(out(r, 2), 0.0);
    EXPECT_EQ(out(r, 3), 1.0);
    EXPECT_EQ(out(r, 4), 0.0);
  }
}

TEST(LabelConcat, OutputWidthIsFeatureDimPlusClasses) {
  Rng rng(1);
  for (int d_x : {1, 3, 7}) {
    for (int C : {2, 3, 5}) {
      Matrix x(4, d_x);
      x.setRandom();
      EXPECT_EQ(dlg::label_concat(x, C - 1, C).cols(), d_x + C);
    }
  }
  EXPECT_THROW(dlg::label_concat(Matrix::Zero(1, 1), 2, 2),
               dlg::ParameterError);
}

TEST(GnnEncode, SingleNodeWithoutEdgesIsLinear) {
  GnnConfig cfg{1, 3, dlg::Activation::Relu, 2};
  ParameterStore store;
  Rng rng(2);
  dlg::init_gnn_params(store, "gnn", cfg, rng);
  store.value("gnn.l0.b").setZero();  // isolate the propagation identity
  Matrix adj = Matrix::Zero(1, 1);
  Matrix x(1, 2);
  x << 0.3, -0.7;
  Matrix h = dlg::gnn_encode(adj, x, cfg, store, "gnn");
  Matrix expected = x * store.value("gnn.l0.w");
  EXPECT_LT((h - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(GnnEncode, IsolatedNodesAreIndependentRows) {
  GnnConfig cfg{1, 3, dlg::Activation::Relu, 2};
  ParameterStore store;
  Rng rng(3);
  dlg::init_gnn_params(store, "gnn", cfg, rng);
  Matrix adj = Matrix::Zero(2, 2);
  Matrix x(2, 2);
  x << 1, 2, -3, 4;
  Matrix h = dlg::gnn_encode(adj, x, cfg, store, "gnn");
  // Swapping the two isolated nodes swaps the output rows.
  Matrix x_swapped(2, 2);
  x_swapped << -3, 4, 1, 2;
  Matrix h_swapped = dlg::gnn_encode(adj, x_swapped, cfg, store, "gnn");
  EXPECT_EQ(h.row(0), h_swapped.row(1));
  EXPECT_EQ(h.row(1), h_swapped.row(0));
}

TEST(GnnEncode, PathGraphMatchesDirectMatrixOracle) {
  // One layer, identity weights: the encoder must equal
  // Dhat^{-1/2} (A+I) Dhat^{-1/2} X computed independently.
  const int n = 4;
  GnnConfig cfg{1, n, dlg::Activation::Relu, n};
  ParameterStore store;
  store.add("gnn.l0.w", Matrix::Identity(n, n));
  store.add("gnn.l0.b", Matrix::Zero(1, n));
  Matrix adj = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    adj(i, i + 1) = 1.0;
    adj(i + 1, i) = 1.0;
  }
  Matrix x(n, n);
  x.setIdentity();
  x(0, 1) = 2.0;
  x(3, 2) = -1.5;

  Matrix with_loops = adj + Matrix::Identity(n, n);
  Matrix dinv = with_loops.rowwise().sum().array().pow(-0.5).matrix();
  Matrix prop = with_loops.cwiseProduct(dinv * dinv.transpose());
  Matrix expected = prop * x;

  Matrix h = dlg::gnn_encode(adj, x, cfg, store, "gnn");
  EXPECT_LT((h - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GnnEncode, PermutationEquivariance) {
  GnnConfig cfg{2, 6, dlg::Activation::Relu, 3};
  ParameterStore store;
  Rng rng(5);
  dlg::init_gnn_params(store, "gnn", cfg, rng);
  dlg::Graph g = dlg_test::random_graph(7, 3, 0, 0.4, rng);
  const std::vector<int> perm = {3, 0, 6, 1, 5, 2, 4};
  Matrix p = permutation_matrix(perm);
  Matrix h = dlg::gnn_encode(g.adjacency, g.features, cfg, store, "gnn");
  Matrix h_perm = dlg::gnn_encode(
      (p * g.adjacency * p.transpose()).eval(), (p * g.features).eval(), cfg,
      store, "gnn");
  EXPECT_LT((p * h - h_perm).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(GnnEncode, WeightedAdjacencyIsContinuous) {
  GnnConfig cfg{2, 5, dlg::Activation::Relu, 3};
  ParameterStore store;
  Rng rng(6);
  dlg::init_gnn_params(store, "gnn", cfg, rng);
  dlg::Graph g = dlg_test::random_graph(6, 3, 0, 0.5, rng);
  Matrix h0 = dlg::gnn_encode(g.adjacency, g.features, cfg, store, "gnn");
  for (double eps : {1e-4, 1e-5, 1e-6}) {
    Matrix perturbed = g.adjacency;
    perturbed(0, 1) = std::min(1.0, perturbed(0, 1) + eps);
    perturbed(1, 0) = perturbed(0, 1);
    Matrix h1 = dlg::gnn_encode(perturbed, g.features, cfg, store, "gnn");
    EXPECT_LT((h1 - h0).cwiseAbs().maxCoeff(), 100.0 * eps);
  }
}

TEST(GnnEncode, ShapeMismatchIsDimensionError) {
  GnnConfig cfg{1, 3, dlg::Activation::Relu, 4};
  ParameterStore store;
  Rng rng(7);
  dlg::init_gnn_params(store, "gnn", cfg, rng);
  Matrix adj = Matrix::Zero(2, 2);
  Matrix x = Matrix::Zero(2, 3);  // expected 4 columns
  EXPECT_THROW(dlg::gnn_encode(adj, x, cfg, store, "gnn"),
               dlg::DimensionError);
}

TEST(Readout, SingleRowIsItself) {
  Matrix h(1, 3);
  h << 1, -2, 3;
  EXPECT_EQ(dlg::readout_mean(h).vector, h);
}

TEST(Readout, MeanOfBasisRows) {
  Matrix h(2, 2);
  h << 1, 0, 0, 1;
  Matrix expected(1, 2);
  expected << 0.5, 0.5;
  EXPECT_EQ(dlg::readout_mean(h).vector, expected);
}

TEST(Readout, PermutationInvariant) {
  Rng rng(8);
  Matrix h(5, 4);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 4; ++c) h(r, c) = rng.uniform(-2.0, 2.0);
  }
  Matrix p = permutation_matrix({4, 2, 0, 3, 1});
  EXPECT_LT((dlg::readout_mean(h).vector -
             dlg::readout_mean((p * h).eval()).vector)
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(Classify, ZeroHeadGivesUniformProbabilities) {
  GnnConfig cfg{2, 4, dlg::Activation::Relu, 3};
  ParameterStore store;
  Rng rng(9);
  dlg::init_classifier_params(store, cfg, 3, rng);
  store.value("head.w").setZero();
  store.value("head.b").setZero();
  dlg::Graph g = dlg_test::random_graph(5, 3, 0, 0.4, rng);
  Matrix q = dlg::classify(g, cfg, store);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(q(0, i), 1.0 / 3.0, 1e-14);
}

TEST(Classify, OutputIsProbabilityVector) {
  GnnConfig cfg{2, 4, dlg::Activation::Relu, 3};
  ParameterStore store;
  Rng rng(10);
  dlg::init_classifier_params(store, cfg, 4, rng);
  for (int trial = 0; trial < 10; ++trial) {
    dlg::Graph g = dlg_test::random_graph(6, 3, 0, 0.5, rng);
    Matrix q = dlg::classify(g, cfg, store);
    EXPECT_NEAR(q.sum(), 1.0, 1e-12);
    EXPECT_GE(q.minCoeff(), 0.0);
  }
}

TEST(Classify, InvariantToNodeRelabeling) {
  GnnConfig cfg{2, 4, dlg::Activation::Relu, 3};
  ParameterStore store;
  Rng rng(11);
  dlg::init_classifier_params(store, cfg, 3, rng);
  dlg::Graph g = dlg_test::random_graph(6, 3, 0, 0.5, rng);
  Matrix p = permutation_matrix({5, 3, 1, 0, 4, 2});
  Matrix q1 = dlg::classify(g, cfg, store);
  Matrix q2 = dlg::classify((p * g.adjacency * p.transpose()).eval(),
                            (p * g.features).eval(), cfg, store);
  EXPECT_LT((q1 - q2).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(InitWeight, BoundsFollowFanIn) {
  Rng rng(12);
  Matrix w = dlg::init_weight(16, 8, rng);
  const double bound = 1.0 / 4.0;
  EXPECT_LE(w.maxCoeff(), bound);
  EXPECT_GE(w.minCoeff(), -bound);
  // Seeded: same seed, same weights.
  Rng rng2(12);
  EXPECT_EQ(dlg::init_weight(16, 8, rng2), w);
}
