// Copyright 2026 The rwn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// Linear ranks for the strict lower triangle of an n x n symmetric matrix.
//
// Pairs (i, j) with 1 <= i < j are ordered column by column:
//
//   (1,2) (1,3) (2,3) (1,4) (2,4) (3,4) (1,5) ...
//     1     2     3     4     5     6     7
//
// so rank(i, j) = (j-1)(j-2)/2 + i. The ranks of all pairs among the first
// n records are exactly [1, n(n-1)/2], independent of n, which lets a
// sampler draw ranks without knowing anything but the total count.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace rwn {

struct RankPair {
  std::uint64_t i;  // 1-based, i < j
  std::uint64_t j;
  friend bool operator==(const RankPair&, const RankPair&) = default;
};

using u128 = unsigned __int128;

// floor(sqrt(x)) together with whether the root is exact.
struct IntegerRoot {
  std::uint64_t root;
  bool exact;
};

constexpr IntegerRoot integer_sqrt(u128 x) {
  // Newton iteration from an upper bound; converges monotonically down.
  if (x < 2) return {static_cast<std::uint64_t>(x), true};
  u128 r = x;
  int bits = 0;
  for (u128 t = x; t != 0; t >>= 1) ++bits;
  r = u128{1} << ((bits + 1) / 2);
  while (true) {
    const u128 next = (r + x / r) / 2;
    if (next >= r) break;
    r = next;
  }
  return {static_cast<std::uint64_t>(r), r * r == x};
}

inline std::uint64_t pair_count(std::uint64_t n) {
  return n < 2 ? 0 : n * (n - 1) / 2;
}

inline std::uint64_t encode_rank(std::uint64_t i, std::uint64_t j) {
  if (i < 1 || i >= j) {
    throw std::invalid_argument("encode_rank: requires 1 <= i < j");
  }
  return (j - 1) * (j - 2) / 2 + i;
}

// Inverse of encode_rank. Uses v = isqrt(8r + 1):
//   v odd and exact      -> r closes column j = (1+v)/2, so i = j-1
//   v odd, not exact     -> j = (3+v)/2
//   v even               -> j = (2+v)/2
// and otherwise i = r - (j-1)(j-2)/2.
inline RankPair decode_rank(std::uint64_t r) {
  if (r < 1) throw std::invalid_argument("decode_rank: rank must be >= 1");
  const IntegerRoot v = integer_sqrt(u128{8} * r + 1);
  std::uint64_t j;
  if (v.root % 2 == 1 && v.exact) {
    j = (1 + v.root) / 2;
    return {j - 1, j};
  }
  if (v.root % 2 == 1) {
    j = (3 + v.root) / 2;
  } else {
    j = (2 + v.root) / 2;
  }
  const u128 before = u128{j - 1} * (j - 2) / 2;
  return {static_cast<std::uint64_t>(r - before), j};
}

}  // namespace rwn
