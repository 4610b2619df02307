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

#include "dlg/finite_diff.hpp"
#include "dlg/param_store.hpp"
#include "dlg/rng.hpp"
#include "dlg/tape.hpp"
#include "test_support.hpp"

using dlg::Matrix;
using dlg::ParameterStore;
using dlg::Rng;
using dlg::Tape;

namespace {

Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

}  // namespace

TEST(TapeForward, SumOfScalarIsIdentity) {
  Tape t;
  Matrix m(1, 1);
  m(0, 0) = 3.0;
  EXPECT_DOUBLE_EQ(t.scalar(t.sum_all(t.constant(m))), 3.0);
}

TEST(TapeForward, SoftmaxOfZerosIsUniform) {
  Tape t;
  Matrix z = Matrix::Zero(1, 3);
  Matrix s = t.value(t.softmax_row(t.constant(z)));
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(s(0, i), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.sum(), 1.0, 1e-12);
}

TEST(TapeForward, MeanOfSigmoidAtZero) {
  Tape t;
  Matrix z = Matrix::Zero(1, 2);
  EXPECT_DOUBLE_EQ(t.scalar(t.mean_all(t.sigmoid(t.constant(z)))), 0.5);
}

TEST(TapeForward, SoftmaxIsAProbabilityVector) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    // Spread kept below ~30 so no term underflows out of the sum entirely.
    Matrix z(1, 5);
    for (int i = 0; i < 5; ++i) z(0, i) = rng.uniform(-14.0, 14.0);
    Tape t;
    Matrix s = t.value(t.softmax_row(t.constant(z)));
    EXPECT_NEAR(s.sum(), 1.0, 1e-12);
    for (int i = 0; i < 5; ++i) {
      EXPECT_GT(s(0, i), 0.0);
      EXPECT_LT(s(0, i), 1.0);
    }
  }
}

TEST(TapeForward, LogSoftmaxMatchesLogOfSoftmax) {
  Rng rng(12);
  Matrix z(1, 4);
  for (int i = 0; i < 4; ++i) z(0, i) = rng.uniform(-5.0, 5.0);
  Tape t;
  Matrix ls = t.value(t.log_softmax_row(t.constant(z)));
  Matrix s = t.value(t.softmax_row(t.constant(z)));
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(ls(0, i), std::log(s(0, i)), 1e-12);
}

TEST(TapeForward, RowNormalizationYieldsUnitRows) {
  Rng rng(13);
  Matrix m(4, 6);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 6; ++c) m(r, c) = rng.uniform(-3.0, 3.0);
  }
  Tape t;
  Matrix out = t.value(t.l2_normalize_rows(t.constant(m)));
  for (int r = 0; r < 4; ++r) EXPECT_NEAR(out.row(r).norm(), 1.0, 1e-12);
}

TEST(TapeForward, ZeroRowPassesThroughNormalizationUnchanged) {
  Matrix m = Matrix::Zero(2, 3);
  m(1, 0) = 3.0;
  ParameterStore store;
  store.add("m", m);
  Tape t;
  Tape::Var out = t.l2_normalize_rows(t.param(store, "m"));
  EXPECT_EQ(t.value(out).row(0).norm(), 0.0);
  EXPECT_NEAR(t.value(out).row(1).norm(), 1.0, 1e-12);
  t.backward(t.sum_all(out));
  // The zero row contributes zero gradient.
  EXPECT_EQ(store.grad("m").row(0).norm(), 0.0);
}

TEST(TapeBackward, SumGradientIsAllOnes) {
  ParameterStore store;
  store.add("w", Matrix::Zero(2, 2));
  Tape t;
  t.backward(t.sum_all(t.param(store, "w")));
  EXPECT_EQ(store.grad("w"), Matrix::Ones(2, 2).eval());
}

TEST(TapeBackward, ElementwiseSquareGradient) {
  ParameterStore store;
  store.add("w", from_rows({{1, 2}, {3, 4}}));
  Tape t;
  Tape::Var w = t.param(store, "w");
  t.backward(t.sum_all(t.hadamard(w, w)));
  EXPECT_EQ(store.grad("w"), from_rows({{2, 4}, {6, 8}}).eval());
}

TEST(TapeBackward, RepeatedBackwardAccumulates) {
  ParameterStore store;
  store.add("w", Matrix::Ones(2, 2));
  Tape t;
  Tape::Var root = t.sum_all(t.param(store, "w"));
  t.backward(root);
  t.backward(root);
  EXPECT_EQ(store.grad("w"), (2.0 * Matrix::Ones(2, 2)).eval());
  store.zero_grads();
  EXPECT_EQ(store.grad("w"), Matrix::Zero(2, 2).eval());
}

TEST(TapeBackward, CompositeObjectiveMatchesFiniteDifferences) {
  // Random 3x3 params through sigmoid/matmul/softmax composites, five seeds.
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    ParameterStore store;
    store.add("w1", dlg::init_weight(3, 3, rng));
    store.add("w2", dlg::init_weight(3, 3, rng));
    Matrix x = dlg_test::random_graph(3, 3, 0, 0.5, rng).features;
    auto obj = [&](Tape& t) {
      Tape::Var w1 = t.param(store, "w1");
      Tape::Var w2 = t.param(store, "w2");
      Tape::Var h = t.sigmoid(t.matmul(t.constant(x), w1));
      Tape::Var z = t.matmul(h, w2);
      Tape::Var probs = t.softmax_row(t.mean_rows(z));
      return t.sum_all(t.hadamard(probs, t.log_softmax_row(t.mean_rows(h))));
    };
    auto report = dlg::finite_diff_check(obj, {&store}, 1e-5, 1e-4);
    EXPECT_TRUE(report.passed())
        << "seed " << seed << " max rel err " << report.max_rel_err();
  }
}

TEST(TapeBackward, LinearObjectiveIsExactToMachinePrecision) {
  Rng rng(31);
  ParameterStore store;
  store.add("w", dlg::init_weight(3, 2, rng));
  Matrix coeff = from_rows({{0.5, -1.25}, {2.0, 0.75}, {-0.5, 1.0}});
  auto obj = [&](Tape& t) {
    return t.sum_all(t.hadamard(t.param(store, "w"), t.constant(coeff)));
  };
  auto report = dlg::finite_diff_check(obj, {&store}, 1e-5, 1e-4);
  // Central differences are exact for linear functions up to rounding.
  EXPECT_LT(report.max_rel_err(), 1e-9);
}

TEST(TapeBackward, GradientIsLinearInObjectiveCombination) {
  Rng rng(41);
  ParameterStore store;
  store.add("w", dlg::init_weight(3, 3, rng));
  Matrix x = dlg_test::random_graph(3, 3, 0, 0.5, rng).features;
  const double a = 1.7, b = -0.3;

  auto build_f = [&](Tape& t, Tape::Var w) {
    return t.sum_all(t.sigmoid(t.matmul(t.constant(x), w)));
  };
  auto build_g = [&](Tape& t, Tape::Var w) {
    return t.mean_all(t.tanh_(t.matmul(w, w)));
  };

  store.zero_grads();
  {
    Tape t;
    t.backward(build_f(t, t.param(store, "w")));
  }
  Matrix grad_f = store.grad("w");
  store.zero_grads();
  {
    Tape t;
    t.backward(build_g(t, t.param(store, "w")));
  }
  Matrix grad_g = store.grad("w");
  store.zero_grads();
  {
    Tape t;
    Tape::Var w = t.param(store, "w");
    t.backward(t.add(t.scale(build_f(t, w), a), t.scale(build_g(t, w), b)));
  }
  Matrix combined = store.grad("w");
  EXPECT_LT((combined - (a * grad_f + b * grad_g)).cwiseAbs().maxCoeff(),
            1e-10);
}

TEST(TapeBackward, IdenticalNoiseGivesBitwiseIdenticalGradients) {
  Rng rng(51);
  ParameterStore store;
  store.add("w", dlg::init_weight(4, 4, rng));
  Matrix noise(4, 4);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) noise(r, c) = rng.logistic();
  }
  auto run = [&]() {
    store.zero_grads();
    Tape t;
    Tape::Var w = t.param(store, "w");
    t.backward(t.sum_all(t.sigmoid(t.add(w, t.constant(noise)))));
    return store.grad("w");
  };
  Matrix g1 = run();
  Matrix g2 = run();
  EXPECT_EQ(g1, g2);  // bitwise
}

TEST(TapeBackward, StraightThroughMatchesSoftGradient) {
  Rng rng(61);
  ParameterStore store;
  store.add("w", dlg::init_weight(3, 3, rng));
  Matrix r(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) r(i, j) = rng.uniform(-1.0, 1.0);
  }
  auto grad_with = [&](bool hard) {
    store.zero_grads();
    Tape t;
    Tape::Var soft = t.sigmoid(t.param(store, "w"));
    Tape::Var out = hard ? t.hard_threshold_st(soft) : soft;
    t.backward(t.sum_all(t.hadamard(out, t.constant(r))));
    return store.grad("w");
  };
  EXPECT_EQ(grad_with(true), grad_with(false));  // identical by construction
}

TEST(TapeBackward, ClampZeroesGradientOutsideInterval) {
  ParameterStore store;
  store.add("w", from_rows({{-20.0, 0.0, 20.0}}));
  Tape t;
  t.backward(t.sum_all(t.clamp(t.param(store, "w"), -10.0, 10.0)));
  EXPECT_EQ(store.grad("w"), from_rows({{0.0, 1.0, 0.0}}).eval());
}

TEST(TapeBackward, LogsumexpGradientIsSoftmax) {
  Rng rng(71);
  Matrix z(1, 5);
  for (int i = 0; i < 5; ++i) z(0, i) = rng.uniform(-4.0, 4.0);
  ParameterStore store;
  store.add("z", z);
  Tape t;
  t.backward(t.logsumexp_row(t.param(store, "z")));
  Matrix s = t.value(t.softmax_row(t.constant(z)));
  EXPECT_LT((store.grad("z") - s).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(TapeErrors, ShapeMismatchNamesThePrimitive) {
  Tape t;
  Tape::Var a = t.constant(Matrix::Zero(2, 3));
  Tape::Var b = t.constant(Matrix::Zero(2, 3));
  try {
    t.matmul(a, b);
    FAIL() << "expected DimensionError";
  } catch (const dlg::DimensionError& e) {
    EXPECT_NE(std::string(e.what()).find("matmul"), std::string::npos);
  }
}

TEST(TapeErrors, LogOfNonPositiveIsDomainError) {
  Tape t;
  EXPECT_THROW(t.log_(t.constant(Matrix::Zero(1, 1))),
               dlg::NumericDomainError);
}

TEST(TapeErrors, ExpOverflowIsDomainError) {
  Tape t;
  Matrix big(1, 1);
  big(0, 0) = 1e308;
  EXPECT_THROW(t.exp_(t.constant(big)), dlg::NumericDomainError);
}

TEST(TapeErrors, BackwardWithoutForwardIsUsageError) {
  Tape t;
  EXPECT_THROW(t.backward(Tape::Var{}), dlg::UsageError);
}

TEST(TapeErrors, BackwardNeedsScalarRoot) {
  Tape t;
  Tape::Var m = t.constant(Matrix::Zero(2, 2));
  EXPECT_THROW(t.backward(m), dlg::UsageError);
}

TEST(FiniteDiff, ReportListsEveryParameter) {
  Rng rng(81);
  ParameterStore store;
  store.add("a", dlg::init_weight(2, 2, rng));
  store.add("b", dlg::init_weight(2, 1, rng));
  auto obj = [&](Tape& t) {
    return t.sum_all(t.matmul(t.param(store, "a"), t.param(store, "b")));
  };
  auto report = dlg::finite_diff_check(obj, {&store}, 1e-5, 1e-4);
  ASSERT_EQ(report.entries.size(), 2u);
  EXPECT_EQ(report.entries[0].param, "a");
  EXPECT_EQ(report.entries[1].param, "b");
  EXPECT_TRUE(report.passed());
}

TEST(ParameterStore, GradShapeMatchesValueShape) {
  ParameterStore store;
  store.add("w", Matrix::Zero(3, 4));
  EXPECT_EQ(store.grad("w").rows(), 3);
  EXPECT_EQ(store.grad("w").cols(), 4);
  EXPECT_THROW(store.accumulate_grad("w", Matrix::Zero(4, 3)),
               dlg::DimensionError);
  EXPECT_THROW(store.add("w", Matrix::Zero(1, 1)), dlg::UsageError);
  EXPECT_THROW(store.value("missing"), dlg::UsageError);
}
