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
#include <vector>

#include "rwn/dataset.hpp"
#include "rwn/error.hpp"

namespace rwn {

struct ColumnScaling {
  double mean = 0.0;
  double sd = 0.0;  // sample sd (divisor n-1); 0 for constant columns
};

// Dense, distance-ready copy of a Dataset.
//
// Numeric columns are z-scored with the sample standard deviation over
// their non-missing cells; a column with sd == 0 becomes all zeros.
// Categorical columns keep their category code and compare by mismatch.
// `missing_fill(j)` is the mean squared contribution of column j over all
// pairs of rows where both cells are present; it stands in for the
// contribution of any pair in which one side is missing.
//
// The view keeps a pointer to its source, which must outlive it.
class StandardizedView {
 public:
  static StandardizedView build(const Dataset& d) {
    StandardizedView v(d);
    for (std::size_t j = 0; j < d.cols(); ++j) {
      if (d.column(j).kind == ColumnKind::kNumeric) {
        v.scaling_[j] = v.fit_scaling(j);
      }
    }
    v.fill_values();
    return v;
  }

  // Scales `d` with another view's means and standard deviations, so rows
  // of the two datasets are comparable. Schemas must match.
  static StandardizedView with_reference(const Dataset& d,
                                         const StandardizedView& reference) {
    if (d.schema() != reference.source().schema()) {
      throw DataError("standardize: schema differs from the reference view");
    }
    StandardizedView v(d);
    v.scaling_ = reference.scaling_;
    v.fill_values();
    v.missing_fill_ = reference.missing_fill_;
    return v;
  }

  const Dataset& source() const { return *source_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  ColumnKind kind(std::size_t j) const { return kinds_[j]; }
  const std::vector<ColumnKind>& kinds() const { return kinds_; }

  // z-score for numeric columns, category code for categorical ones.
  double value(std::size_t i, std::size_t j) const {
    return values_[i * cols_ + j];
  }
  bool is_missing(std::size_t i, std::size_t j) const {
    return missing_[i * cols_ + j] != 0;
  }
  const double* row_values(std::size_t i) const {
    return values_.data() + i * cols_;
  }
  const std::uint8_t* row_missing(std::size_t i) const {
    return missing_.data() + i * cols_;
  }

  const ColumnScaling& scaling(std::size_t j) const { return scaling_[j]; }
  double missing_fill(std::size_t j) const { return missing_fill_[j]; }
  const std::vector<double>& missing_fills() const { return missing_fill_; }

  double unstandardize(std::size_t j, double z) const {
    return scaling_[j].mean + z * scaling_[j].sd;
  }

 private:
  explicit StandardizedView(const Dataset& d)
      : source_(&d),
        rows_(d.rows()),
        cols_(d.cols()),
        kinds_(d.cols()),
        scaling_(d.cols()),
        values_(d.rows() * d.cols(), 0.0),
        missing_(d.rows() * d.cols(), 0),
        missing_fill_(d.cols(), 0.0) {
    for (std::size_t j = 0; j < cols_; ++j) kinds_[j] = d.column(j).kind;
  }

  ColumnScaling fit_scaling(std::size_t j) const {
    const Dataset& d = *source_;
    double sum = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const Cell& c = d.at(i, j);
      if (c.is_missing()) continue;
      sum += c.number_value();
      ++m;
    }
    ColumnScaling s;
    if (m == 0) return s;
    s.mean = sum / static_cast<double>(m);
    if (m < 2) return s;
    double ss = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      const Cell& c = d.at(i, j);
      if (c.is_missing()) continue;
      const double dev = c.number_value() - s.mean;
      ss += dev * dev;
    }
    s.sd = std::sqrt(ss / static_cast<double>(m - 1));
    return s;
  }

  void fill_values() {
    const Dataset& d = *source_;
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) {
        const Cell& c = d.at(i, j);
        const std::size_t idx = i * cols_ + j;
        if (c.is_missing()) {
          missing_[idx] = 1;
        } else if (kinds_[j] == ColumnKind::kNumeric) {
          const ColumnScaling& s = scaling_[j];
          values_[idx] = s.sd > 0.0 ? (c.number_value() - s.mean) / s.sd : 0.0;
        } else {
          values_[idx] = static_cast<double>(c.label_code());
        }
      }
    }
    for (std::size_t j = 0; j < cols_; ++j) {
      missing_fill_[j] = kinds_[j] == ColumnKind::kNumeric
                             ? numeric_pair_mean(j)
                             : categorical_pair_mean(j);
    }
  }

  // mean over pairs of (z_a - z_b)^2 = 2 * sum (z - zbar)^2 / (m - 1)
  double numeric_pair_mean(std::size_t j) const {
    double sum = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (is_missing(i, j)) continue;
      sum += value(i, j);
      ++m;
    }
    if (m < 2) return 0.0;
    const double mean = sum / static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (is_missing(i, j)) continue;
      const double dev = value(i, j) - mean;
      ss += dev * dev;
    }
    return 2.0 * ss / static_cast<double>(m - 1);
  }

  // fraction of pairs with differing labels = (m^2 - sum c_k^2) / (m(m-1))
  double categorical_pair_mean(std::size_t j) const {
    std::vector<double> counts(source_->column(j).categories.size(), 0.0);
    double m = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (is_missing(i, j)) continue;
      counts[static_cast<std::size_t>(value(i, j))] += 1.0;
      m += 1.0;
    }
    if (m < 2.0) return 0.0;
    double same = 0.0;
    for (double c : counts) same += c * c;
    return (m * m - same) / (m * (m - 1.0));
  }

  const Dataset* source_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<ColumnKind> kinds_;
  std::vector<ColumnScaling> scaling_;
  std::vector<double> values_;
  std::vector<std::uint8_t> missing_;
  std::vector<double> missing_fill_;
};

inline StandardizedView standardize(const Dataset& d) {
  return StandardizedView::build(d);
}

}  // namespace rwn
