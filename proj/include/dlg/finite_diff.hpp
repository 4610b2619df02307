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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dlg/param_store.hpp"
#include "dlg/tape.hpp"

namespace dlg {

// Builds a scalar objective on a fresh tape from the current store values.
// Must be deterministic: any stochastic noise is drawn once by the caller and
// captured in the closure as a constant.
using Objective = std::function<Tape::Var(Tape&)>;

struct FiniteDiffEntry {
  std::string store_label;
  std::string param;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
};

struct FiniteDiffReport {
  double step = 0.0;
  double tolerance = 0.0;
  std::vector<FiniteDiffEntry> entries;

  double max_rel_err() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.max_rel_err);
    return m;
  }
  bool passed() const { return max_rel_err() < tolerance; }
};

// Central-difference check of backward() against (f(p+e) - f(p-e)) / (2e),
// entry by entry. The relative error denominator is
// max(|analytic|, |numeric|, 1e-4), which degrades to an absolute comparison
// at 1e-8 for near-zero gradients.
inline FiniteDiffReport finite_diff_check(
    const Objective& objective, const std::vector<ParameterStore*>& stores,
    double step, double tolerance) {
  if (!(step > 0.0)) throw ParameterError("finite_diff_check: step must be > 0");

  FiniteDiffReport report;
  report.step = step;
  report.tolerance = tolerance;

  // Analytic gradients at the current point.
  std::vector<std::map<std::string, Matrix>> analytic(stores.size());
  {
    for (ParameterStore* s : stores) s->zero_grads();
    Tape tape;
    Tape::Var root = objective(tape);
    tape.backward(root);
    for (std::size_t si = 0; si < stores.size(); ++si) {
      for (const std::string& name : stores[si]->names()) {
        analytic[si][name] = stores[si]->grad(name);
      }
    }
  }

  auto eval = [&]() {
    Tape tape;
    return tape.scalar(objective(tape));
  };

  for (std::size_t si = 0; si < stores.size(); ++si) {
    ParameterStore& store = *stores[si];
    for (const std::string& name : store.names()) {
      Matrix& value = store.value(name);
      const Matrix& grad = analytic[si][name];
      FiniteDiffEntry entry;
      entry.store_label = "store" + std::to_string(si);
      entry.param = name;
      for (Eigen::Index r = 0; r < value.rows(); ++r) {
        for (Eigen::Index c = 0; c < value.cols(); ++c) {
          const double original = value(r, c);
          value(r, c) = original + step;
          const double f_plus = eval();
          value(r, c) = original - step;
          const double f_minus = eval();
          value(r, c) = original;
          const double numeric = (f_plus - f_minus) / (2.0 * step);
          const double abs_err = std::abs(grad(r, c) - numeric);
          const double denom =
              std::max({std::abs(grad(r, c)), std::abs(numeric), 1e-4});
          entry.max_abs_err = std::max(entry.max_abs_err, abs_err);
          entry.max_rel_err = std::max(entry.max_rel_err, abs_err / denom);
        }
      }
      report.entries.push_back(std::move(entry));
    }
  }
  return report;
}

}  // namespace dlg
