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

#include "rwn/standardize.hpp"

#include <cmath>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace rwn {
namespace {

using ::rwn::testing::column_dataset;
using ::rwn::testing::random_dataset;

TEST(Standardize, ZScoresWithSampleSd) {
  const Dataset d = column_dataset({1, 2, 3});
  const auto v = standardize(d);
  EXPECT_DOUBLE_EQ(v.value(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(v.value(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(v.value(2, 0), 1.0);
  EXPECT_DOUBLE_EQ(v.scaling(0).mean, 2.0);
  EXPECT_DOUBLE_EQ(v.scaling(0).sd, 1.0);
  EXPECT_DOUBLE_EQ(v.unstandardize(0, 1.0), 3.0);
}

TEST(Standardize, ConstantColumnBecomesZeros) {
  const auto v = standardize(column_dataset({5, 5, 5}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(v.value(i, 0), 0.0);
  EXPECT_EQ(v.scaling(0).sd, 0.0);
  EXPECT_EQ(v.missing_fill(0), 0.0);
}

TEST(Standardize, MissingStaysMissingAndCategoricalKeepsCodes) {
  const Dataset d = Dataset::create(
      {{"x", ColumnKind::kNumeric, {}}, {"g", ColumnKind::kCategorical, {"a", "b"}}},
      {Cell::number(1), Cell::label(1), Cell::missing(), Cell::label(0),
       Cell::number(3), Cell::missing()});
  const auto v = standardize(d);
  EXPECT_TRUE(v.is_missing(1, 0));
  EXPECT_TRUE(v.is_missing(2, 1));
  EXPECT_FALSE(v.is_missing(0, 0));
  EXPECT_EQ(v.value(0, 1), 1.0);
  EXPECT_EQ(v.value(1, 1), 0.0);
  // mean 2, sd sqrt(2) over the two present cells
  EXPECT_NEAR(v.value(0, 0), -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Standardize, MomentInvariantsHold) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Dataset d = random_dataset(seed, {.rows = 40, .numeric = 4,
                                            .categorical = 1,
                                            .missing_rate = 0.1});
    const auto v = standardize(d);
    for (std::size_t j = 0; j < d.cols(); ++j) {
      if (v.kind(j) != ColumnKind::kNumeric || v.scaling(j).sd == 0) continue;
      double sum = 0, m = 0;
      for (std::size_t i = 0; i < d.rows(); ++i) {
        if (!v.is_missing(i, j)) sum += v.value(i, j), m += 1;
      }
      const double mean = sum / m;
      double ss = 0;
      for (std::size_t i = 0; i < d.rows(); ++i) {
        if (!v.is_missing(i, j)) ss += (v.value(i, j) - mean) * (v.value(i, j) - mean);
      }
      EXPECT_NEAR(mean, 0.0, 1e-9);
      EXPECT_NEAR(std::sqrt(ss / (m - 1)), 1.0, 1e-9);
    }
  }
}

TEST(Standardize, Idempotent) {
  const Dataset d = random_dataset(11, {.rows = 30, .numeric = 3, .categorical = 0});
  const auto v = standardize(d);
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      cells.push_back(Cell::number(v.value(i, j)));
    }
  }
  const Dataset z = d.with_cells(cells);
  const auto vz = standardize(z);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      EXPECT_NEAR(vz.value(i, j), v.value(i, j), 1e-9);
    }
  }
}

// Oracle: average the column's squared contribution over every pair of
// rows with both cells present.
TEST(Standardize, MissingFillMatchesPairEnumeration) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Dataset d = random_dataset(seed, {.rows = 25, .numeric = 2,
                                            .categorical = 2,
                                            .missing_rate = 0.2});
    const auto v = standardize(d);
    for (std::size_t j = 0; j < d.cols(); ++j) {
      double sum = 0;
      double pairs = 0;
      for (std::size_t a = 0; a < d.rows(); ++a) {
        for (std::size_t b = a + 1; b < d.rows(); ++b) {
          if (v.is_missing(a, j) || v.is_missing(b, j)) continue;
          const double t = v.kind(j) == ColumnKind::kNumeric
                               ? std::pow(v.value(a, j) - v.value(b, j), 2)
                               : (v.value(a, j) != v.value(b, j) ? 1.0 : 0.0);
          sum += t;
          pairs += 1;
        }
      }
      const double expected = pairs > 0 ? sum / pairs : 0.0;
      EXPECT_NEAR(v.missing_fill(j), expected, 1e-12) << "seed " << seed;
    }
  }
}

TEST(Standardize, ReferenceScalingReusesMoments) {
  const Dataset a = column_dataset({1, 2, 3});
  const Dataset b = column_dataset({3, 3, 5});
  const auto va = standardize(a);
  const auto vb = StandardizedView::with_reference(b, va);
  EXPECT_DOUBLE_EQ(vb.value(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(vb.value(2, 0), 3.0);
  EXPECT_EQ(vb.missing_fill(0), va.missing_fill(0));
  const Dataset other = column_dataset({1, 2}, "y");
  EXPECT_THROW(StandardizedView::with_reference(other, va), DataError);
}

}  // namespace
}  // namespace rwn
