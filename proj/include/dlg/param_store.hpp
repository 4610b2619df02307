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

#include <map>
#include <string>
#include <vector>

#include "dlg/matrix.hpp"

namespace dlg {

// Named dense parameter matrices with per-entry gradient accumulators.
// Gradients always share the value's shape; accumulators start at zero and
// grow by += until zero_grads() is called.
class ParameterStore {
 public:
  struct Entry {
    Matrix value;
    Matrix grad;
  };

  void add(const std::string& name, Matrix value) {
    if (entries_.count(name)) {
      throw UsageError("parameter '" + name + "' already exists");
    }
    Entry e;
    e.grad = Matrix::Zero(value.rows(), value.cols());
    e.value = std::move(value);
    entries_.emplace(name, std::move(e));
  }

  bool has(const std::string& name) const { return entries_.count(name) > 0; }

  Matrix& value(const std::string& name) { return find(name).value; }
  const Matrix& value(const std::string& name) const {
    return find(name).value;
  }

  Matrix& grad(const std::string& name) { return find(name).grad; }
  const Matrix& grad(const std::string& name) const {
    return find(name).grad;
  }

  void accumulate_grad(const std::string& name, const Matrix& g) {
    Entry& e = find(name);
    require_same_shape("accumulate_grad", e.value, g);
    e.grad += g;
  }

  void zero_grads() {
    for (auto& [name, e] : entries_) e.grad.setZero();
  }

  // Names in lexicographic order; iteration order is part of the determinism
  // contract for optimizers and checkpoints.
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, e] : entries_) out.push_back(name);
    return out;
  }

  std::size_t size() const { return entries_.size(); }

  std::size_t entry_count() const {
    std::size_t n = 0;
    for (const auto& [name, e] : entries_) {
      n += static_cast<std::size_t>(e.value.size());
    }
    return n;
  }

 private:
  Entry& find(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
      throw UsageError("unknown parameter '" + name + "'");
    }
    return it->second;
  }
  const Entry& find(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
      throw UsageError("unknown parameter '" + name + "'");
    }
    return it->second;
  }

  std::map<std::string, Entry> entries_;
};

}  // namespace dlg
