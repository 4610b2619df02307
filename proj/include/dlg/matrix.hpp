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

#include <Eigen/Dense>
#include <sstream>
#include <string>

#include "dlg/errors.hpp"

namespace dlg {

// All math runs on 64-bit dense matrices with row-major storage. Row-major
// keeps serialized layouts and node-feature rows contiguous.
using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::string shape_str(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

inline void require_same_shape(const char* op, const Matrix& a,
                               const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a) +
                         " vs " + shape_str(b));
  }
}

inline void require_finite(const char* op, const Matrix& m) {
  if (!m.allFinite()) {
    throw NumericDomainError(std::string(op) +
                             ": produced a non-finite entry");
  }
}

// True when m is symmetric with zero diagonal and entries in [0,1], i.e. a
// valid (possibly weighted) adjacency matrix.
inline bool is_valid_adjacency(const Matrix& m, double tol = 0.0) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) != 0.0) return false;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v = m(i, j);
      if (!(v >= -tol && v <= 1.0 + tol)) return false;
      if (std::abs(v - m(j, i)) > tol) return false;
    }
  }
  return true;
}

}  // namespace dlg
