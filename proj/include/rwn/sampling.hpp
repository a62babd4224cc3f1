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

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rwn/random.hpp"

namespace rwn {

// Draws `count` distinct integers uniformly from [0, population) and
// returns them in ascending order. Floyd's algorithm: exactly `count`
// bounded draws, each followed by a membership test against the set of
// values already taken.
inline std::vector<std::uint64_t> sample_distinct(CounterStream& stream,
                                                  std::uint64_t population,
                                                  std::uint64_t count) {
  if (count > population) {
    throw std::invalid_argument("sample_distinct: count exceeds population");
  }
  std::vector<std::uint64_t> out;
  out.reserve(count);
  if (count == population) {
    for (std::uint64_t v = 0; v < population; ++v) out.push_back(v);
    return out;
  }
  std::unordered_set<std::uint64_t> taken;
  taken.reserve(count * 2);
  for (std::uint64_t j = population - count; j < population; ++j) {
    const std::uint64_t t = stream.below(j + 1);
    const std::uint64_t pick = taken.contains(t) ? j : t;
    taken.insert(pick);
    out.push_back(pick);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// In-place Fisher-Yates. Written out rather than using std::shuffle so the
// permutation is identical across standard library implementations.
template <typename T>
void shuffle_in_place(std::vector<T>& values, CounterStream& stream) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.below(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace rwn
