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

#include "dlg/matrix.hpp"
#include "dlg/rng.hpp"

namespace dlg {

// Fixed small topologies. Cycle/house/crane serve as label-deciding motifs,
// tree/ladder/wheel as spurious bases.
enum class MotifKind { Cycle, House, Crane, Tree, Ladder, Wheel };

inline std::string motif_name(MotifKind k) {
  switch (k) {
    case MotifKind::Cycle: return "cycle";
    case MotifKind::House: return "house";
    case MotifKind::Crane: return "crane";
    case MotifKind::Tree: return "tree";
    case MotifKind::Ladder: return "ladder";
    case MotifKind::Wheel: return "wheel";
  }
  throw ParameterError("unknown motif kind");
}

inline MotifKind parse_motif(const std::string& s) {
  for (MotifKind k : {MotifKind::Cycle, MotifKind::House, MotifKind::Crane,
                      MotifKind::Tree, MotifKind::Ladder, MotifKind::Wheel}) {
    if (motif_name(k) == s) return k;
  }
  throw ParameterError("unknown motif kind '" + s + "'");
}

// Connected adjacency-only fragment.
struct MotifFragment {
  int n = 0;
  Matrix adjacency;
};

namespace detail {

inline MotifFragment empty_fragment(int n) {
  MotifFragment f;
  f.n = n;
  f.adjacency = Matrix::Zero(n, n);
  return f;
}

inline void link(MotifFragment& f, int i, int j) {
  f.adjacency(i, j) = 1.0;
  f.adjacency(j, i) = 1.0;
}

}  // namespace detail

// Builds the named topology with `size` nodes. `size` is the total node
// count; legal ranges are kind-specific:
//   cycle:  size >= 3, ring
//   house:  size == 5, 4-cycle plus a roof apex joined to two adjacent
//           cycle nodes
//   crane:  size == 5, 4-cycle plus a pendant node hanging off one corner
//   tree:   size >= 2, complete binary tree in heap order
//   ladder: even size >= 4, two rails of size/2 with rungs
//   wheel:  size >= 4, hub joined to a rim ring of size-1 nodes
// The rng parameter is reserved for randomized variants; the shipped kinds
// are deterministic.
inline MotifFragment make_motif(MotifKind kind, int size,
                                [[maybe_unused]] Rng& rng) {
  using detail::empty_fragment;
  using detail::link;
  switch (kind) {
    case MotifKind::Cycle: {
      if (size < 3) throw ParameterError("cycle: size must be >= 3");
      MotifFragment f = empty_fragment(size);
      for (int i = 0; i < size; ++i) link(f, i, (i + 1) % size);
      return f;
    }
    case MotifKind::House: {
      if (size != 5) throw ParameterError("house: size must be 5");
      MotifFragment f = empty_fragment(5);
      link(f, 0, 1);
      link(f, 1, 2);
      link(f, 2, 3);
      link(f, 3, 0);
      link(f, 4, 0);  // roof apex sits on the 0-1 wall
      link(f, 4, 1);
      return f;
    }
    case MotifKind::Crane: {
      if (size != 5) throw ParameterError("crane: size must be 5");
      MotifFragment f = empty_fragment(5);
      link(f, 0, 1);
      link(f, 1, 2);
      link(f, 2, 3);
      link(f, 3, 0);
      link(f, 4, 0);  // pendant neck off one corner
      return f;
    }
    case MotifKind::Tree: {
      if (size < 2) throw ParameterError("tree: size must be >= 2");
      MotifFragment f = empty_fragment(size);
      for (int i = 1; i < size; ++i) link(f, i, (i - 1) / 2);
      return f;
    }
    case MotifKind::Ladder: {
      if (size < 4 || size % 2 != 0) {
        throw ParameterError("ladder: size must be even and >= 4");
      }
      const int rail = size / 2;
      MotifFragment f = empty_fragment(size);
      for (int i = 0; i + 1 < rail; ++i) {
        link(f, i, i + 1);              // left rail
        link(f, rail + i, rail + i + 1);  // right rail
      }
      for (int i = 0; i < rail; ++i) link(f, i, rail + i);  // rungs
      return f;
    }
    case MotifKind::Wheel: {
      if (size < 4) throw ParameterError("wheel: size must be >= 4");
      const int rim = size - 1;
      MotifFragment f = empty_fragment(size);
      for (int i = 0; i < rim; ++i) {
        link(f, 1 + i, 1 + (i + 1) % rim);  // rim ring
        link(f, 0, 1 + i);                  // spoke
      }
      return f;
    }
  }
  throw ParameterError("unknown motif kind");
}

// Default sizes used by the dataset generators.
inline int default_motif_size(MotifKind kind) {
  switch (kind) {
    case MotifKind::Cycle:
    case MotifKind::House:
    case MotifKind::Crane: return 5;
    case MotifKind::Tree: return 15;
    case MotifKind::Ladder: return 12;
    case MotifKind::Wheel: return 7;
  }
  throw ParameterError("unknown motif kind");
}

}  // namespace dlg
