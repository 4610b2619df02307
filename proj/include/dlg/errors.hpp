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

#include <stdexcept>
#include <string>

namespace dlg {

// Shape mismatch in a primitive or layer; the message names the operation.
class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// log/exp domain violations and any non-finite value produced by a primitive.
class NumericDomainError : public std::runtime_error {
 public:
  explicit NumericDomainError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// API misuse, e.g. backward without a recorded forward, or label-dependent
// paths invoked at inference time.
class UsageError : public std::logic_error {
 public:
  explicit UsageError(const std::string& msg) : std::logic_error(msg) {}
};

// Invalid user-supplied value (illegal motif size, tau <= 0, label >= C, ...).
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& msg)
      : std::invalid_argument(msg) {}
};

// Violated operation precondition (non-unit vectors, non-probability input).
class PreconditionError : public std::invalid_argument {
 public:
  explicit PreconditionError(const std::string& msg)
      : std::invalid_argument(msg) {}
};

// Malformed serialized data; message carries the offending line number.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid records that disagree on C / d_x across a dataset.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dataset-level contract violations (empty class, incompatible datasets).
class DatasetError : public std::runtime_error {
 public:
  explicit DatasetError(const std::string& msg) : std::runtime_error(msg) {}
};

// A support set without any member sharing the anchor label reached a loss
// that requires one.
class SamplingContractError : public std::runtime_error {
 public:
  explicit SamplingContractError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// Non-finite gradients or losses during training; message carries the dump.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dlg
