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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rwn/error.hpp"
#include "rwn/standardize.hpp"

namespace rwn {

// The one pairwise distance used everywhere: weighted Euclidean over
// standardized values,
//
//   d(a, b)^2 = sum_j w_j * t_j(a, b)
//
// where t_j is (z_a - z_b)^2 for numeric columns, [label_a != label_b] for
// categorical columns, and the column's missing_fill when either side is
// missing. Weights multiply the squared term.
class DistanceSpec {
 public:
  explicit DistanceSpec(const StandardizedView& view,
                        std::vector<double> weights = {})
      : view_(&view), other_(&view), weights_(std::move(weights)) {
    if (weights_.empty()) weights_.assign(view.cols(), 1.0);
    if (weights_.size() != view.cols()) {
      throw ConfigError("weights", "expected " + std::to_string(view.cols()) +
                                       " column weights, got " +
                                       std::to_string(weights_.size()));
    }
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw ConfigError("weights", "column weights must be finite and >= 0");
      }
    }
  }

  // Distances between rows of `view` (first index) and rows of `other`
  // (second index), using `view`'s missing fills. Both views must share a
  // column layout, typically via StandardizedView::with_reference.
  DistanceSpec(const StandardizedView& view, const StandardizedView& other,
               std::vector<double> weights = {})
      : DistanceSpec(view, std::move(weights)) {
    if (other.kinds() != view.kinds()) {
      throw DataError("distance: views have different column layouts");
    }
    other_ = &other;
  }

  const StandardizedView& view() const { return *view_; }
  std::size_t rows() const { return view_->rows(); }
  std::size_t cols() const { return view_->cols(); }
  const std::vector<double>& weights() const { return weights_; }

  double squared(std::size_t i, std::size_t j) const {
    if (i == j && other_ == view_) return 0.0;
    const std::size_t p = view_->cols();
    const double* a = view_->row_values(i);
    const double* b = other_->row_values(j);
    const std::uint8_t* ma = view_->row_missing(i);
    const std::uint8_t* mb = other_->row_missing(j);
    double sum = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      double term;
      if (ma[c] | mb[c]) {
        term = view_->missing_fill(c);
      } else if (view_->kind(c) == ColumnKind::kNumeric) {
        const double diff = a[c] - b[c];
        term = diff * diff;
      } else {
        term = a[c] != b[c] ? 1.0 : 0.0;
      }
      sum += weights_[c] * term;
    }
    return sum;
  }

  double operator()(std::size_t i, std::size_t j) const {
    return std::sqrt(squared(i, j));
  }

  // Bounds-checked.
  double distance(std::size_t i, std::size_t j) const {
    if (i >= view_->rows() || j >= other_->rows()) {
      throw std::out_of_range("distance: record index out of range");
    }
    return (*this)(i, j);
  }

 private:
  const StandardizedView* view_;
  const StandardizedView* other_;
  std::vector<double> weights_;
};

}  // namespace rwn
