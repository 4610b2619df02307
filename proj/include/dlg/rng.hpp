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
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "dlg/errors.hpp"

namespace dlg {

// Deterministic random source. All draws are derived from the raw mt19937_64
// stream with fixed bit manipulations, never through std:: distributions,
// so that (seed, call sequence) fully determines every value on any
// standard-conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1); never returns an exact endpoint.
  double uniform_open() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw ParameterError("uniform_index: n must be positive");
    const std::uint64_t limit =
        UINT64_MAX - (UINT64_MAX % static_cast<std::uint64_t>(n));
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return static_cast<std::size_t>(x % static_cast<std::uint64_t>(n));
  }

  // Standard logistic draw, log(u) - log(1-u). This is the additive noise of
  // the binary concrete relaxation.
  double logistic() {
    double u = uniform_open();
    return std::log(u) - std::log1p(-u);
  }

  // Independently seeded sub-generator; used for per-graph generation streams
  // (sub seed = master seed XOR stream index).
  Rng spawn(std::uint64_t stream) const { return Rng(seed_ ^ stream); }

  // State round-trips as text so training can be checkpointed and resumed.
  std::string save_state() const {
    std::ostringstream os;
    os << seed_ << " " << engine_;
    return os.str();
  }

  static Rng restore_state(const std::string& text) {
    std::istringstream is(text);
    std::uint64_t seed = 0;
    if (!(is >> seed)) throw ParseError("rng state: missing seed");
    Rng r(seed);
    if (!(is >> r.engine_)) throw ParseError("rng state: malformed engine");
    return r;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace dlg
