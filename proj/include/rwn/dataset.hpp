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
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rwn/error.hpp"

namespace rwn {

enum class ColumnKind : std::uint8_t { kNumeric, kCategorical };

inline const char* to_string(ColumnKind kind) {
  return kind == ColumnKind::kNumeric ? "numeric" : "categorical";
}

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  // Ordered distinct labels; a categorical cell stores its position here.
  std::vector<std::string> categories;

  std::optional<std::int32_t> code_of(std::string_view label) const {
    for (std::size_t c = 0; c < categories.size(); ++c) {
      if (categories[c] == label) return static_cast<std::int32_t>(c);
    }
    return std::nullopt;
  }

  friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

using Schema = std::vector<ColumnSchema>;

// One value of the microdata grid: a finite number, a category code, or
// missing. Missing is its own state and never aliases a value.
class Cell {
 public:
  enum class State : std::uint8_t { kMissing, kNumber, kLabel };

  constexpr Cell() = default;

  static constexpr Cell missing() { return Cell(); }
  static constexpr Cell number(double value) {
    return Cell(State::kNumber, value);
  }
  static constexpr Cell label(std::int32_t code) {
    return Cell(State::kLabel, static_cast<double>(code));
  }

  constexpr State state() const { return state_; }
  constexpr bool is_missing() const { return state_ == State::kMissing; }
  constexpr bool is_number() const { return state_ == State::kNumber; }
  constexpr bool is_label() const { return state_ == State::kLabel; }

  constexpr double number_value() const { return value_; }
  constexpr std::int32_t label_code() const {
    return static_cast<std::int32_t>(value_);
  }

  friend constexpr bool operator==(const Cell& a, const Cell& b) {
    if (a.state_ != b.state_) return false;
    if (a.state_ == State::kMissing) return true;
    return a.value_ == b.value_;
  }

 private:
  constexpr Cell(State state, double value) : state_(state), value_(value) {}

  State state_ = State::kMissing;
  double value_ = 0.0;
};

// The n x p microdata matrix. Immutable once constructed; every instance
// satisfies n >= 1, p >= 1, unique column names, and cells that conform to
// their column's kind.
class Dataset {
 public:
  static Dataset create(Schema schema, std::vector<Cell> cells) {
    Dataset d;
    d.schema_ = std::move(schema);
    d.cells_ = std::move(cells);
    d.validate();
    return d;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return schema_.size(); }
  const Schema& schema() const { return schema_; }
  const ColumnSchema& column(std::size_t j) const { return schema_[j]; }

  const Cell& at(std::size_t i, std::size_t j) const {
    return cells_[i * cols() + j];
  }
  std::span<const Cell> row(std::size_t i) const {
    return {cells_.data() + i * cols(), cols()};
  }
  std::span<const Cell> cells() const { return cells_; }

  std::optional<std::size_t> column_index(std::string_view name) const {
    for (std::size_t j = 0; j < schema_.size(); ++j) {
      if (schema_[j].name == name) return j;
    }
    return std::nullopt;
  }

  std::size_t require_column(std::string_view name) const {
    auto j = column_index(name);
    if (!j) throw DataError("unknown column '" + std::string(name) + "'");
    return *j;
  }

  // Same schema, new cells (validated).
  Dataset with_cells(std::vector<Cell> cells) const {
    return create(schema_, std::move(cells));
  }

  // Rows selected by index, in the given order.
  Dataset select_rows(std::span<const std::size_t> indices) const {
    std::vector<Cell> out;
    out.reserve(indices.size() * cols());
    for (std::size_t i : indices) {
      auto r = row(i);
      out.insert(out.end(), r.begin(), r.end());
    }
    return create(schema_, std::move(out));
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.schema_ == b.schema_ && a.cells_ == b.cells_;
  }

 private:
  Dataset() = default;

  void validate() {
    if (schema_.empty()) throw DataError("dataset has no columns");
    if (cells_.size() % schema_.size() != 0) {
      throw DataError("cell count is not a multiple of the column count");
    }
    rows_ = cells_.size() / schema_.size();
    if (rows_ == 0) throw DataError("dataset has no rows");

    std::unordered_set<std::string> names;
    for (const auto& c : schema_) {
      if (!names.insert(c.name).second) {
        throw DataError("duplicate column name '" + c.name + "'");
      }
      if (c.kind == ColumnKind::kCategorical) {
        std::unordered_set<std::string> labels(c.categories.begin(),
                                               c.categories.end());
        if (labels.size() != c.categories.size()) {
          throw DataError("column '" + c.name + "' lists a category twice");
        }
      }
    }
    const std::size_t p = schema_.size();
    for (std::size_t idx = 0; idx < cells_.size(); ++idx) {
      const Cell& cell = cells_[idx];
      if (cell.is_missing()) continue;
      const ColumnSchema& col = schema_[idx % p];
      if (col.kind == ColumnKind::kNumeric) {
        if (!cell.is_number() || !std::isfinite(cell.number_value())) {
          throw DataError("row " + std::to_string(idx / p) + ", column '" +
                          col.name + "': expected a finite number");
        }
      } else {
        if (!cell.is_label() || cell.label_code() < 0 ||
            static_cast<std::size_t>(cell.label_code()) >=
                col.categories.size()) {
          throw DataError("row " + std::to_string(idx / p) + ", column '" +
                          col.name + "': not a declared category");
        }
      }
    }
  }

  Schema schema_;
  std::vector<Cell> cells_;
  std::size_t rows_ = 0;
};

}  // namespace rwn
