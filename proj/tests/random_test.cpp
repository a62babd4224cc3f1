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

#include "rwn/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "rwn/sampling.hpp"

namespace rwn {
namespace {

// Known-answer vectors published with Random123.
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}),
            (Philox4x32Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c,
                               0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                          {0xffffffff, 0xffffffff}),
            (Philox4x32Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6,
                               0x6d5451fd}));
  EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                          {0xa4093822, 0x299f31d0}),
            (Philox4x32Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420,
                               0x24126ea1}));
}

TEST(CounterStream, AddressedStreamsAreReproducible) {
  CounterStream a(42, Domain::kCellCoin, 7, 3);
  CounterStream b(42, Domain::kCellCoin, 7, 3);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(a(), b());
}

TEST(CounterStream, DomainsAndAddressesDiffer) {
  const auto first = [](CounterStream s) { return s(); };
  const auto base = first(CounterStream(42, Domain::kCellCoin, 7, 3));
  EXPECT_NE(base, first(CounterStream(42, Domain::kCellDonor, 7, 3)));
  EXPECT_NE(base, first(CounterStream(42, Domain::kCellCoin, 8, 3)));
  EXPECT_NE(base, first(CounterStream(42, Domain::kCellCoin, 7, 4)));
  EXPECT_NE(base, first(CounterStream(43, Domain::kCellCoin, 7, 3)));
}

TEST(CounterStream, BelowStaysInRangeAndCoversIt) {
  CounterStream s(1, Domain::kSynthetic);
  std::vector<int> counts(7, 0);
  for (int t = 0; t < 70000; ++t) {
    const auto v = s.below(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  // Each bucket expects 10000 with sd ~ 92.6.
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(CounterStream, Uniform01Moments) {
  CounterStream s(2, Domain::kSynthetic);
  double sum = 0, sum2 = 0;
  const int n = 200000;
  for (int t = 0; t < n; ++t) {
    const double u = s.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum2 += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sum2 / n - 0.25, 1.0 / 12.0, 0.003);
}

TEST(CounterStream, NormalMoments) {
  CounterStream s(3, Domain::kSynthetic);
  double sum = 0, sum2 = 0;
  const int n = 200000;
  for (int t = 0; t < n; ++t) {
    const double z = s.normal();
    sum += z;
    sum2 += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum2 / n, 1.0, 0.02);
}

TEST(SampleDistinct, SortedDistinctInRange) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CounterStream s(seed, Domain::kSynthetic);
    const auto v = sample_distinct(s, 100, 30);
    ASSERT_EQ(v.size(), 30u);
    EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
    EXPECT_EQ(std::set<std::uint64_t>(v.begin(), v.end()).size(), 30u);
    EXPECT_LT(v.back(), 100u);
  }
}

TEST(SampleDistinct, SaturatedAndOverfull) {
  CounterStream s(0, Domain::kSynthetic);
  const auto all = sample_distinct(s, 5, 5);
  EXPECT_EQ(all, (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
  EXPECT_THROW(sample_distinct(s, 5, 6), std::invalid_argument);
}

// Floyd's algorithm gives every element inclusion probability count/N.
TEST(SampleDistinct, InclusionFrequencyIsUniform) {
  const int reps = 20000;
  std::vector<int> hits(20, 0);
  for (int r = 0; r < reps; ++r) {
    CounterStream s(static_cast<std::uint64_t>(r), Domain::kSynthetic);
    for (auto v : sample_distinct(s, 20, 5)) ++hits[v];
  }
  // p = 0.25, sd of the count = sqrt(20000 * .25 * .75) ~ 61.
  for (int h : hits) EXPECT_NEAR(h, 5000, 4 * 61);
}

TEST(Shuffle, IsAPermutation) {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  CounterStream s(9, Domain::kPartition);
  shuffle_in_place(v, s);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

}  // namespace
}  // namespace rwn
