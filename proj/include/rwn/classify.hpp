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

// Misclassification study: train a classifier on a released training split
// and score it on the untouched holdout, against the same classifier
// trained on the unreleased split.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "rwn/dataset.hpp"
#include "rwn/distance.hpp"
#include "rwn/engine.hpp"
#include "rwn/error.hpp"
#include "rwn/parallel.hpp"
#include "rwn/random.hpp"
#include "rwn/sampling.hpp"
#include "rwn/standardize.hpp"

namespace rwn {

// Copy of `d` without column `drop`.
inline Dataset drop_column(const Dataset& d, std::size_t drop) {
  Schema schema;
  for (std::size_t j = 0; j < d.cols(); ++j) {
    if (j != drop) schema.push_back(d.column(j));
  }
  std::vector<Cell> cells;
  cells.reserve(d.rows() * schema.size());
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      if (j != drop) cells.push_back(d.at(i, j));
    }
  }
  return Dataset::create(std::move(schema), std::move(cells));
}

// Predicts a label code for every row of `test` from `train`, whose
// `label` column is fully present. Both share a schema.
using Classifier = std::function<std::vector<std::int32_t>(
    const Dataset& train, std::size_t label, const Dataset& test)>;

// k-nearest-neighbor majority vote on features standardized with the
// training split's moments. Distance ties go to the smaller training index;
// vote ties go to the class whose closest voter ranks first.
inline Classifier knn_classifier(std::size_t k = 25) {
  return [k](const Dataset& train, std::size_t label, const Dataset& test) {
    if (train.rows() == 0) throw DataError("empty training set");
    const Dataset xtrain = drop_column(train, label);
    const Dataset xtest = drop_column(test, label);
    const StandardizedView vtrain = standardize(xtrain);
    const StandardizedView vtest = StandardizedView::with_reference(xtest, vtrain);
    const DistanceSpec spec(vtest, vtrain);
    const std::size_t kk = std::min(k, train.rows());
    const std::size_t levels = train.column(label).categories.size();
    std::vector<std::int32_t> out(test.rows());
    std::vector<std::pair<double, std::size_t>> cands(train.rows());
    std::vector<std::size_t> votes(levels);
    std::vector<std::size_t> first_rank(levels);
    for (std::size_t t = 0; t < test.rows(); ++t) {
      for (std::size_t r = 0; r < train.rows(); ++r) {
        cands[r] = {spec.squared(t, r), r};
      }
      std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(kk),
                        cands.end());
      std::fill(votes.begin(), votes.end(), 0);
      std::fill(first_rank.begin(), first_rank.end(), kk);
      for (std::size_t rank = 0; rank < kk; ++rank) {
        const auto c = static_cast<std::size_t>(
            train.at(cands[rank].second, label).label_code());
        ++votes[c];
        first_rank[c] = std::min(first_rank[c], rank);
      }
      std::size_t best = 0;
      for (std::size_t c = 1; c < levels; ++c) {
        if (votes[c] > votes[best] ||
            (votes[c] == votes[best] && first_rank[c] < first_rank[best])) {
          best = c;
        }
      }
      out[t] = static_cast<std::int32_t>(best);
    }
    return out;
  };
}

struct ClassificationConfig {
  std::string label;
  std::size_t holdout = 200;
  std::size_t replications = 25;
  std::uint64_t seed = 0;  // drives the splits
  std::vector<RwnConfig> grid;
  std::size_t max_redraws = 1000;
};

struct ClassificationRow {
  RwnConfig config;
  std::vector<double> rates;  // one per replication
  std::vector<double> baseline_rates;
  double mean_rate = 0.0;
  double mean_baseline = 0.0;
  std::size_t dropped_training_rows = 0;  // nullified or label-missing
};

struct ClassificationResult {
  std::vector<ClassificationRow> rows;
  double baseline = 0.0;   // mean no-release misclassification
  std::size_t redraws = 0;  // splits discarded for a missing class
};

struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::size_t redraws = 0;
};

// Records with a present label, shuffled by (seed, replication, attempt);
// the first `holdout` are the test split. A split whose training part
// lacks a class present in the data is discarded and redrawn.
inline HoldoutSplit holdout_split(const Dataset& d, std::size_t label,
                                  std::size_t holdout, std::uint64_t seed,
                                  std::size_t rep, std::size_t max_redraws) {
  std::vector<std::size_t> labeled;
  std::vector<std::uint8_t> present(d.column(label).categories.size(), 0);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (d.at(i, label).is_missing()) continue;
    labeled.push_back(i);
    present[static_cast<std::size_t>(d.at(i, label).label_code())] = 1;
  }
  if (holdout == 0 || holdout >= labeled.size()) {
    throw ConfigError("holdout", "must be in [1, " +
                                     std::to_string(labeled.size()) + ")");
  }
  HoldoutSplit split;
  for (std::size_t attempt = 0;; ++attempt) {
    if (attempt > max_redraws) {
      throw DataError("could not draw a training split containing every class");
    }
    std::vector<std::size_t> order = labeled;
    CounterStream s(seed, Domain::kHoldoutSplit, static_cast<std::uint32_t>(rep),
                    static_cast<std::uint32_t>(attempt));
    shuffle_in_place(order, s);
    split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(holdout));
    split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(holdout), order.end());
    std::sort(split.test.begin(), split.test.end());
    std::sort(split.train.begin(), split.train.end());
    std::vector<std::uint8_t> seen(present.size(), 0);
    for (std::size_t i : split.train) {
      seen[static_cast<std::size_t>(d.at(i, label).label_code())] = 1;
    }
    if (seen == present) break;
    ++split.redraws;
  }
  return split;
}

inline double misclassification(const Dataset& train, std::size_t label,
                                const Dataset& test,
                                const Classifier& classifier) {
  const auto predicted = classifier(train, label, test);
  std::size_t wrong = 0;
  for (std::size_t t = 0; t < test.rows(); ++t) {
    wrong += predicted[t] != test.at(t, label).label_code();
  }
  return static_cast<double>(wrong) / static_cast<double>(test.rows());
}

inline ClassificationResult classification_study(
    const Dataset& d, const ClassificationConfig& cfg,
    const Classifier& classifier = knn_classifier(), unsigned workers = 1) {
  const std::size_t label = d.require_column(cfg.label);
  if (d.column(label).kind != ColumnKind::kCategorical) {
    throw ConfigError("label", "column '" + cfg.label + "' is not categorical");
  }
  if (cfg.replications == 0) throw ConfigError("reps", "must be >= 1");
  for (const auto& g : cfg.grid) g.validate();

  const std::size_t reps = cfg.replications;
  const std::size_t points = cfg.grid.size();
  std::vector<double> baseline(reps);
  std::vector<std::size_t> redraws(reps);
  std::vector<std::vector<double>> rates(points, std::vector<double>(reps));
  std::vector<std::vector<std::size_t>> dropped(points,
                                                std::vector<std::size_t>(reps));

  parallel_for(reps, workers, [&](std::size_t r) {
    const HoldoutSplit split =
        holdout_split(d, label, cfg.holdout, cfg.seed, r, cfg.max_redraws);
    redraws[r] = split.redraws;
    const Dataset train = d.select_rows(split.train);
    const Dataset test = d.select_rows(split.test);
    baseline[r] = misclassification(train, label, test, classifier);
    for (std::size_t g = 0; g < points; ++g) {
      RwnConfig rc = cfg.grid[g];
      rc.seed = replicate_seed(rc.seed, r);
      const RwnRun run = run_rwn(train, rc);
      std::vector<std::size_t> keep;
      for (std::size_t i = 0; i < train.rows(); ++i) {
        if (!run.output.released.at(i, label).is_missing()) keep.push_back(i);
      }
      dropped[g][r] = train.rows() - keep.size();
      rates[g][r] =
          keep.empty() ? 1.0
                       : misclassification(run.output.released.select_rows(keep),
                                           label, test, classifier);
    }
  });

  ClassificationResult result;
  for (std::size_t r = 0; r < reps; ++r) {
    result.baseline += baseline[r];
    result.redraws += redraws[r];
  }
  result.baseline /= static_cast<double>(reps);
  for (std::size_t g = 0; g < points; ++g) {
    ClassificationRow row;
    row.config = cfg.grid[g];
    row.rates = rates[g];
    row.baseline_rates = baseline;
    row.mean_rate = std::accumulate(rates[g].begin(), rates[g].end(), 0.0) /
                    static_cast<double>(reps);
    row.mean_baseline = result.baseline;
    for (std::size_t x : dropped[g]) row.dropped_training_rows += x;
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace rwn
