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

#include "rwn/distance.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "rwn/random.hpp"
#include "rwn/sampling.hpp"
#include "test_util.hpp"

namespace rwn {
namespace {

using ::rwn::testing::numeric_dataset;
using ::rwn::testing::random_dataset;

TEST(Distance, IdenticalRowsAreAtZero) {
  const Dataset d = numeric_dataset({{1, 2}, {1, 2}, {3, 0}});
  const auto v = standardize(d);
  const DistanceSpec spec(v);
  EXPECT_EQ(spec.distance(0, 1), 0.0);
  EXPECT_EQ(spec.distance(2, 2), 0.0);
}

TEST(Distance, SingleCategoricalMismatchIsOne) {
  const Dataset d = Dataset::create(
      {{"x", ColumnKind::kNumeric, {}},
       {"g", ColumnKind::kCategorical, {"a", "b"}}},
      {Cell::number(1), Cell::label(0), Cell::number(1), Cell::label(1),
       Cell::number(2), Cell::label(0)});
  const auto v = standardize(d);
  const DistanceSpec spec(v);
  EXPECT_DOUBLE_EQ(spec.distance(0, 1), 1.0);
}

TEST(Distance, StandardizedNumericRows) {
  // Column 0 standardizes to (-1, 1), column 1 is constant -> 0.
  const Dataset d = numeric_dataset({{0, 7}, {2, 7}});
  const auto v = standardize(d);
  // z = (x - 1) / sqrt(2): rows are (-1/sqrt2, 0) and (1/sqrt2, 0).
  EXPECT_NEAR(DistanceSpec(v).distance(0, 1), std::sqrt(2.0), 1e-15);

  // Already-standardized values (-1, 0) vs (1, 0) -> 2.
  const Dataset z = numeric_dataset({{-1, 0}, {0, 0}, {1, 0}});
  const auto vz = standardize(z);
  ASSERT_DOUBLE_EQ(vz.value(0, 0), -1.0);
  ASSERT_DOUBLE_EQ(vz.value(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(DistanceSpec(vz).distance(0, 2), 2.0);
}

TEST(Distance, WeightsScaleSquaredTerms) {
  const Dataset z = numeric_dataset({{-1, -1}, {0, 0}, {1, 1}});
  const auto v = standardize(z);
  EXPECT_DOUBLE_EQ(DistanceSpec(v, {1.0, 0.0}).distance(0, 2), 2.0);
  EXPECT_DOUBLE_EQ(DistanceSpec(v, {4.0, 0.0}).distance(0, 2), 4.0);
  EXPECT_THROW(DistanceSpec(v, {1.0}), ConfigError);
  EXPECT_THROW(DistanceSpec(v, {1.0, -1.0}), ConfigError);
}

TEST(Distance, MissingCellUsesColumnFill) {
  const Dataset d = Dataset::create(
      {{"x", ColumnKind::kNumeric, {}}, {"y", ColumnKind::kNumeric, {}}},
      {Cell::number(1), Cell::number(0), Cell::number(2), Cell::missing(),
       Cell::number(3), Cell::number(0)});
  const auto v = standardize(d);
  const DistanceSpec spec(v);
  // x: z = (-1, 0, 1); y constant on present cells -> fill 0.
  EXPECT_DOUBLE_EQ(spec.distance(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(v.missing_fill(0), 2.0);
  EXPECT_EQ(spec.distance(1, 1), 0.0);
}

TEST(Distance, OutOfRange) {
  const auto v = standardize(numeric_dataset({{1}, {2}}));
  const DistanceSpec spec(v);
  EXPECT_THROW(spec.distance(0, 2), std::out_of_range);
  EXPECT_THROW(spec.distance(5, 0), std::out_of_range);
}

TEST(Distance, SymmetryNonnegativityMixedData) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Dataset d = random_dataset(seed, {.rows = 30, .numeric = 3,
                                            .categorical = 2,
                                            .missing_rate = 0.15});
    const auto v = standardize(d);
    const DistanceSpec spec(v);
    for (std::size_t a = 0; a < d.rows(); ++a) {
      EXPECT_EQ(spec(a, a), 0.0);
      for (std::size_t b = 0; b < d.rows(); ++b) {
        ASSERT_GE(spec(a, b), 0.0);
        ASSERT_EQ(spec(a, b), spec(b, a));
      }
    }
  }
}

TEST(Distance, TriangleInequalityNumeric) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset d = random_dataset(seed, {.rows = 25, .numeric = 4,
                                            .categorical = 0});
    const auto v = standardize(d);
    const DistanceSpec spec(v);
    for (std::size_t a = 0; a < d.rows(); ++a)
      for (std::size_t b = 0; b < d.rows(); ++b)
        for (std::size_t c = 0; c < d.rows(); ++c)
          ASSERT_LE(spec(a, c), spec(a, b) + spec(b, c) + 1e-12);
  }
}

TEST(Distance, RowPermutationPermutesResults) {
  const Dataset d = random_dataset(4, {.rows = 20, .numeric = 3, .categorical = 1,
                                       .missing_rate = 0.1});
  std::vector<std::size_t> perm(d.rows());
  std::iota(perm.begin(), perm.end(), 0);
  CounterStream s(4, Domain::kSynthetic);
  shuffle_in_place(perm, s);
  const Dataset pd = d.select_rows(perm);
  const auto v = standardize(d);
  const auto pv = standardize(pd);
  const DistanceSpec spec(v), pspec(pv);
  for (std::size_t a = 0; a < d.rows(); ++a)
    for (std::size_t b = 0; b < d.rows(); ++b)
      EXPECT_NEAR(pspec(a, b), spec(perm[a], perm[b]), 1e-12);
}

}  // namespace
}  // namespace rwn
