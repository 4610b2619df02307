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
#include <set>

#include "dlg/finite_diff.hpp"
#include "dlg/objectives.hpp"
#include "test_support.hpp"

using dlg::GraphRepr;
using dlg::LdForm;
using dlg::Matrix;
using dlg::ParameterStore;
using dlg::Rng;
using dlg::SupportSet;
using dlg::Tape;
using dlg_test::unit_repr;

namespace {

std::vector<int> member_counts(const SupportSet& s, int C) {
  std::vector<int> counts(static_cast<std::size_t>(C), 0);
  for (int y : s.labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

}  // namespace

TEST(SupportSampling, OnePerClassByDefault) {
  Rng rng(1);
  dlg::Dataset ds = dlg_test::random_dataset(3, 5, 5, 3, rng);
  SupportSet s = dlg::support_set_sample(ds, 1.0, 0, rng);
  ASSERT_EQ(s.indices.size(), 3u);
  EXPECT_EQ(member_counts(s, 3), (std::vector<int>{1, 1, 1}));
}

TEST(SupportSampling, FractionalKKeepsAnchorLabel) {
  Rng rng(2);
  dlg::Dataset ds = dlg_test::random_dataset(4, 4, 5, 3, rng);
  for (int trial = 0; trial < 30; ++trial) {
    SupportSet s = dlg::support_set_sample(ds, 0.5, 2, rng);
    ASSERT_EQ(s.indices.size(), 2u);
    EXPECT_EQ(member_counts(s, 4)[2], 1);
  }
}

TEST(SupportSampling, IntegerKIsExactlyStratified) {
  Rng rng(3);
  dlg::Dataset ds = dlg_test::random_dataset(3, 6, 5, 3, rng);
  SupportSet s = dlg::support_set_sample(ds, 2.0, 1, rng);
  ASSERT_EQ(s.indices.size(), 6u);
  EXPECT_EQ(member_counts(s, 3), (std::vector<int>{2, 2, 2}));
}

TEST(SupportSampling, EmptyClassIsDatasetError) {
  Rng rng(4);
  dlg::Dataset ds = dlg_test::random_dataset(2, 3, 5, 3, rng);
  ds.num_classes = 3;  // class 2 unpopulated
  EXPECT_THROW(dlg::support_set_sample(ds, 1.0, 0, rng), dlg::DatasetError);
}

TEST(Membership, FrozenThreePointExample) {
  // h_a=[1,0], supports at distances^2 (0, 2, 4).
  Matrix h_a = unit_repr({1, 0}).vector;
  std::vector<GraphRepr> reps = {unit_repr({1, 0}), unit_repr({0, 1}),
                                 unit_repr({-1, 0})};
  Matrix p = dlg::membership_prob(h_a, reps);
  EXPECT_NEAR(p(0, 0), 0.8668133321973347, 1e-12);
  EXPECT_NEAR(p(0, 1), 0.11731042782619835, 1e-12);
  EXPECT_NEAR(p(0, 2), 0.015876239976466762, 1e-12);
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
}

TEST(Membership, IdenticalSupportsAreUniform) {
  Matrix h_a = unit_repr({0.6, 0.8}).vector;
  std::vector<GraphRepr> reps(3, unit_repr({1, 0}));
  Matrix p = dlg::membership_prob(h_a, reps);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(p(0, i), 1.0 / 3.0, 1e-12);
}

TEST(Membership, MatchesBruteForceOnRandomConfigurations) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 2 + static_cast<int>(rng.uniform_index(6));
    const int members = 2 + static_cast<int>(rng.uniform_index(5));
    Matrix h_a = dlg_test::random_unit_row(dim, rng);
    std::vector<GraphRepr> reps;
    for (int i = 0; i < members; ++i) {
      GraphRepr r;
      r.vector = dlg_test::random_unit_row(dim, rng);
      r.normalized = true;
      reps.push_back(r);
    }
    Matrix p = dlg::membership_prob(h_a, reps);
    std::vector<double> oracle = dlg_test::brute_force_membership(h_a, reps);
    for (int i = 0; i < members; ++i) {
      EXPECT_NEAR(p(0, i), oracle[static_cast<std::size_t>(i)], 1e-12);
    }
  }
}

TEST(Membership, NonUnitInputIsPreconditionError) {
  Matrix h_a(1, 2);
  h_a << 2.0, 0.0;
  std::vector<GraphRepr> reps = {unit_repr({1, 0})};
  EXPECT_THROW(dlg::membership_prob(h_a, reps), dlg::PreconditionError);
}

TEST(DistributionLoss, AllIdenticalVectorsGiveLogFour) {
  GraphRepr u = unit_repr({1, 0});
  std::vector<GraphRepr> reps(3, u);
  std::vector<int> labels = {0, 1, 2};
  double ld = dlg::distribution_loss(u.vector, u.vector, reps, labels, 0,
                                     LdForm::Contrastive);
  EXPECT_NEAR(ld, std::log(4.0), 1e-12);
}

TEST(DistributionLoss, OrthogonalAnchorGivesLogThree) {
  Matrix h_a = unit_repr({0, 0, 1}).vector;
  std::vector<GraphRepr> reps = {unit_repr({1, 0, 0}), unit_repr({0, 1, 0})};
  std::vector<int> labels = {0, 1};
  Matrix h_v = unit_repr({1, 0, 0}).vector;
  // h_a orthogonal to everything: positives contribute 0, the denominator is
  // log(3 e^0).
  double ld = dlg::distribution_loss(h_a, h_v, reps, labels, 0,
                                     LdForm::Contrastive);
  EXPECT_NEAR(ld, std::log(3.0), 1e-12);
}

TEST(DistributionLoss, PaperLiteralFormFlipsTheLogSign) {
  GraphRepr u = unit_repr({1, 0});
  std::vector<GraphRepr> reps(3, u);
  std::vector<int> labels = {0, 1, 2};
  double literal = dlg::distribution_loss(u.vector, u.vector, reps, labels, 0,
                                          LdForm::PaperLiteral);
  // -2 - log(4 e^2) = -4 - log 4.
  EXPECT_NEAR(literal, -4.0 - std::log(4.0), 1e-12);
}

TEST(DistributionLoss, MatchesClosedFormFromDots) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 4;
    Matrix h_a = dlg_test::random_unit_row(dim, rng);
    Matrix h_v = dlg_test::random_unit_row(dim, rng);
    std::vector<GraphRepr> reps;
    std::vector<int> labels;
    std::vector<double> dots;
    for (int i = 0; i < 3; ++i) {
      GraphRepr r;
      r.vector = dlg_test::random_unit_row(dim, rng);
      r.normalized = true;
      reps.push_back(r);
      labels.push_back(i);
      dots.push_back(2.0 * h_a.row(0).dot(r.vector.row(0)));
    }
    const double hv_dot = 2.0 * h_a.row(0).dot(h_v.row(0));
    for (bool contrastive : {true, false}) {
      double lib = dlg::distribution_loss(
          h_a, h_v, reps, labels, 1,
          contrastive ? LdForm::Contrastive : LdForm::PaperLiteral);
      double oracle =
          dlg_test::ld_from_dots(dots, labels, 1, hv_dot, contrastive);
      EXPECT_NEAR(lib, oracle, 1e-12);
    }
  }
}

TEST(DistributionLoss, NoPositiveMemberIsContractViolation) {
  GraphRepr u = unit_repr({1, 0});
  std::vector<GraphRepr> reps = {u, u};
  std::vector<int> labels = {0, 1};
  EXPECT_THROW(dlg::distribution_loss(u.vector, u.vector, reps, labels, 2,
                                      LdForm::Contrastive),
               dlg::SamplingContractError);
}

TEST(DistributionLoss, GradientMatchesFiniteDifferences) {
  Rng rng(7);
  ParameterStore store;
  store.add("ha", dlg_test::random_unit_row(5, rng));
  store.add("hv", dlg_test::random_unit_row(5, rng));
  std::vector<Matrix> reps;
  for (int i = 0; i < 3; ++i) reps.push_back(dlg_test::random_unit_row(5, rng));
  for (LdForm form : {LdForm::Contrastive, LdForm::PaperLiteral}) {
    auto obj = [&](Tape& t) {
      std::vector<Tape::Var> rv;
      for (const Matrix& r : reps) rv.push_back(t.constant(r));
      return dlg::distribution_loss_tape(t, t.param(store, "ha"),
                                         t.param(store, "hv"), rv, {0, 1, 2},
                                         0, form);
    };
    auto report = dlg::finite_diff_check(obj, {&store}, 1e-5, 1e-4);
    EXPECT_TRUE(report.passed()) << "max rel err " << report.max_rel_err();
  }
}

TEST(DistributionLoss, DirectionalMonotonicity) {
  // Strictly decreasing in the positive similarity; strictly increasing in
  // any negative similarity and in the invariant-graph similarity.
  std::vector<double> dots = {0.4, -0.2, 0.1};
  std::vector<int> labels = {0, 1, 2};
  const double hv = 0.3;
  const double eps = 1e-6;
  const double base = dlg_test::ld_from_dots(dots, labels, 0, hv, true);
  auto bump = [&](int idx, double delta) {
    std::vector<double> d = dots;
    d[static_cast<std::size_t>(idx)] += delta;
    return dlg_test::ld_from_dots(d, labels, 0, hv, true);
  };
  EXPECT_LT(bump(0, eps), base);   // positive up -> loss down
  EXPECT_GT(bump(1, eps), base);   // negative up -> loss up
  EXPECT_GT(bump(2, eps), base);
  EXPECT_GT(dlg_test::ld_from_dots(dots, labels, 0, hv + eps, true), base);
}

TEST(LabelLoss, PerfectOneHotPredictionsGiveZero) {
  Matrix q(1, 3);
  q << 1.0, 0.0, 0.0;
  EXPECT_DOUBLE_EQ(dlg::label_loss(q, q, 0), 0.0);
}

TEST(LabelLoss, UniformBinaryCaseIsTwoLogTwo) {
  Matrix q(1, 2);
  q << 0.5, 0.5;
  EXPECT_NEAR(dlg::label_loss(q, q, 0), 2.0 * std::log(2.0), 1e-12);
}

TEST(LabelLoss, FirstTermIsCrossEntropy) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix z(1, 3);
    for (int i = 0; i < 3; ++i) z(0, i) = rng.uniform(-2.0, 2.0);
    Tape t;
    Matrix q_v = t.value(t.softmax_row(t.constant(z)));
    // With q_a uniform the second term is the constant log C; subtracting
    // it leaves the cross-entropy of q_v against Y.
    Matrix q_a = Matrix::Constant(1, 3, 1.0 / 3.0);
    const int y = static_cast<int>(rng.uniform_index(3));
    const double lc = dlg::label_loss(q_v, q_a, y);
    EXPECT_NEAR(lc - std::log(3.0), -std::log(q_v(0, y)), 1e-12);
  }
}

TEST(LabelLoss, TapeAndValuePathsAgree) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix zv(1, 4), za(1, 4);
    for (int i = 0; i < 4; ++i) {
      zv(0, i) = rng.uniform(-3.0, 3.0);
      za(0, i) = rng.uniform(-3.0, 3.0);
    }
    const int y = static_cast<int>(rng.uniform_index(4));
    Tape t;
    double tape_value = t.scalar(
        dlg::label_loss_tape(t, t.constant(zv), t.constant(za), y, 4, false));
    Matrix qv = t.value(t.softmax_row(t.constant(zv)));
    Matrix qa = t.value(t.softmax_row(t.constant(za)));
    EXPECT_NEAR(tape_value, dlg::label_loss(qv, qa, y), 1e-12);
  }
}

TEST(LabelLoss, FirstTermMinimizedExactlyAtOneHot) {
  // Grid over the simplex at C=2: cross-entropy achieves 0 only at the
  // one-hot target.
  for (double p = 0.0; p <= 1.0001; p += 0.05) {
    Matrix q(1, 2);
    q << p, 1.0 - p;
    Matrix qa(1, 2);
    qa << 0.5, 0.5;
    const double first_term =
        dlg::label_loss(q, qa, 0) - (-(q(0, 0) * std::log(0.5) +
                                       q(0, 1) * std::log(0.5)));
    if (p >= 1.0) {
      EXPECT_NEAR(first_term, 0.0, 1e-9);
    } else {
      EXPECT_GT(first_term, 0.0);
    }
  }
}

TEST(LabelLoss, SecondTermMinimizedAtMatchingDistributions) {
  // For fixed q_v, the cross term over q_a is minimized at q_a = q_v
  // (Gibbs inequality), checked by grid search at C=3.
  Matrix qv(1, 3);
  qv << 0.5, 0.3, 0.2;
  auto second_term = [&](const Matrix& qa) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s -= qv(0, i) * std::log(qa(0, i));
    return s;
  };
  Matrix best = qv;
  const double at_match = second_term(best);
  for (double a = 0.05; a < 0.95; a += 0.05) {
    for (double b = 0.05; a + b < 1.0; b += 0.05) {
      Matrix qa(1, 3);
      qa << a, b, 1.0 - a - b;
      EXPECT_GE(second_term(qa), at_match - 1e-12);
    }
  }
}

TEST(LabelLoss, DetachedTargetStopsGradientThroughQv) {
  Rng rng(10);
  ParameterStore store;
  store.add("zv", dlg::init_weight(1, 3, rng));
  Matrix za = dlg::init_weight(1, 3, rng);
  auto grad_with = [&](bool detach) {
    store.zero_grads();
    Tape t;
    t.backward(dlg::label_loss_tape(t, t.param(store, "zv"), t.constant(za),
                                    0, 3, detach));
    return store.grad("zv");
  };
  Matrix g_detached = grad_with(true);
  Matrix g_full = grad_with(false);
  EXPECT_GT((g_detached - g_full).cwiseAbs().maxCoeff(), 1e-12);
  // Detached variant must equal the pure first-term gradient.
  store.zero_grads();
  {
    Tape t;
    Matrix onehot = Matrix::Zero(1, 3);
    onehot(0, 0) = 1.0;
    t.backward(t.scale(
        t.sum_all(t.hadamard(t.log_softmax_row(t.param(store, "zv")),
                             t.constant(onehot))),
        -1.0));
  }
  Matrix g_first_term = store.grad("zv");
  // g_detached = first-term gradient because the second term no longer sees
  // zv except through the constant copy.
  EXPECT_LT((g_detached - g_first_term).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MiOracle, UniformMembershipValue) {
  Matrix h_a = unit_repr({0.6, 0.8}).vector;
  std::vector<GraphRepr> reps(3, unit_repr({1, 0}));
  std::vector<int> labels = {0, 1, 2};
  const double v = dlg::mi_surrogate_oracle(h_a, reps, labels, 1, 3);
  EXPECT_NEAR(v, std::log(1.0 / 3.0) / 3.0, 1e-12);
  EXPECT_NEAR(v, -0.36620409622270322, 1e-12);
}

TEST(MiOracle, FrozenExampleFromMembership) {
  Matrix h_a = unit_repr({1, 0}).vector;
  std::vector<GraphRepr> reps = {unit_repr({1, 0}), unit_repr({0, 1}),
                                 unit_repr({-1, 0})};
  std::vector<int> labels = {0, 1, 2};
  EXPECT_NEAR(dlg::mi_surrogate_oracle(h_a, reps, labels, 0, 3),
              -0.047643876166633244, 1e-12);
}

TEST(MiOracle, PerfectAlignmentApproachesZeroFromBelow) {
  std::vector<int> labels = {0, 1};
  double prev = -1e9;
  for (double t : {0.5, 0.9, 0.99, 0.9999}) {
    Matrix h_a = unit_repr({1, 0}).vector;
    // Positive support converges to h_a, negative to -h_a.
    GraphRepr pos = unit_repr({t, std::sqrt(1 - t * t)});
    GraphRepr neg = unit_repr({-1, 0});
    const double v =
        dlg::mi_surrogate_oracle(h_a, {pos, neg}, labels, 0, 2);
    EXPECT_GT(v, prev);  // monotone increase
    EXPECT_LT(v, 0.0);
    prev = v;
  }
}

TEST(MiOracle, ContrastiveDescentIncreasesTheSurrogate) {
  // Moving h_a along the negative gradient of L_d must increase the Eq-style
  // mutual-information surrogate on random configurations.
  Rng rng(11);
  int improved = 0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    ParameterStore store;
    store.add("ha", dlg_test::random_unit_row(4, rng));
    Matrix h_v = dlg_test::random_unit_row(4, rng);
    std::vector<Matrix> reps;
    std::vector<GraphRepr> rep_structs;
    std::vector<int> labels = {0, 1, 2};
    for (int i = 0; i < 3; ++i) {
      Matrix r = dlg_test::random_unit_row(4, rng);
      reps.push_back(r);
      GraphRepr gr;
      gr.vector = r;
      gr.normalized = true;
      rep_structs.push_back(gr);
    }
    auto normalized = [](const Matrix& v) {
      Matrix out = v;
      out /= out.norm();
      return out;
    };
    const double before = dlg::mi_surrogate_oracle(
        normalized(store.value("ha")), rep_structs, labels, 0, 3);
    store.zero_grads();
    Tape t;
    std::vector<Tape::Var> rv;
    for (const Matrix& r : reps) rv.push_back(t.constant(r));
    t.backward(dlg::distribution_loss_tape(t, t.param(store, "ha"),
                                           t.constant(h_v), rv, labels, 0,
                                           LdForm::Contrastive));
    Matrix stepped = store.value("ha") - 0.05 * store.grad("ha");
    const double after = dlg::mi_surrogate_oracle(normalized(stepped),
                                                  rep_structs, labels, 0, 3);
    if (after > before) ++improved;
  }
  // Directional, not exact: expect nearly all random configurations improve.
  EXPECT_GE(improved, trials - 2);
}

TEST(Membership, ShiftInvarianceOfDistances) {
  // Adding a common constant to all squared distances leaves probabilities
  // unchanged (softmax shift invariance); checked against the brute-force
  // form with an explicit shift.
  Rng rng(12);
  Matrix h_a = dlg_test::random_unit_row(3, rng);
  std::vector<GraphRepr> reps;
  for (int i = 0; i < 4; ++i) {
    GraphRepr r;
    r.vector = dlg_test::random_unit_row(3, rng);
    r.normalized = true;
    reps.push_back(r);
  }
  Matrix p = dlg::membership_prob(h_a, reps);
  const double shift = 7.5;
  std::vector<double> shifted(4);
  double denom = 0.0;
  for (int i = 0; i < 4; ++i) {
    double d2 = (h_a - reps[static_cast<std::size_t>(i)].vector).squaredNorm();
    shifted[static_cast<std::size_t>(i)] = std::exp(-(d2 + shift));
    denom += shifted[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(p(0, i), shifted[static_cast<std::size_t>(i)] / denom, 1e-12);
  }
}
