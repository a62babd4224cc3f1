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

// Distance-evaluation counts and wall time of each neighborhood backend on
// synthetic data of growing size.

#include <chrono>
#include <cstdint>
#include <string>
#include <vector>

#include "rwn/dataset.hpp"
#include "rwn/distance.hpp"
#include "rwn/io.hpp"
#include "rwn/neighborhoods.hpp"
#include "rwn/random.hpp"
#include "rwn/standardize.hpp"

namespace rwn {

struct BenchConfig {
  std::vector<std::size_t> sizes = {1000, 2000, 4000};
  std::vector<Backend> backends = {Backend::kExact, Backend::kPool,
                                   Backend::kPairSample, Backend::kPartitioned};
  std::size_t columns = 4;
  double eps = 0.5;
  std::uint32_t k = 5;
  std::uint64_t m = 100;
  std::uint32_t u = 4;
  Backend inner = Backend::kExact;
  std::uint64_t seed = 0;
};

struct BenchRow {
  std::size_t n = 0;
  Backend backend = Backend::kExact;
  std::uint64_t evaluations = 0;
  double seconds = 0.0;
};

inline Dataset synthetic_gaussian(std::size_t n, std::size_t p,
                                  std::uint64_t seed) {
  CounterStream s(seed, Domain::kSynthetic, static_cast<std::uint32_t>(n));
  Schema schema;
  for (std::size_t j = 0; j < p; ++j) {
    schema.push_back({"x" + std::to_string(j), ColumnKind::kNumeric, {}});
  }
  std::vector<Cell> cells;
  cells.reserve(n * p);
  for (std::size_t i = 0; i < n * p; ++i) cells.push_back(Cell::number(s.normal()));
  return Dataset::create(std::move(schema), std::move(cells));
}

inline std::vector<BenchRow> run_bench(const BenchConfig& cfg,
                                       unsigned workers = 1) {
  std::vector<BenchRow> rows;
  for (std::size_t n : cfg.sizes) {
    const Dataset d = synthetic_gaussian(n, cfg.columns, cfg.seed);
    const StandardizedView view = standardize(d);
    const DistanceSpec spec(view);
    for (Backend b : cfg.backends) {
      NeighborhoodParams p;
      p.eps = cfg.eps;
      p.k = cfg.k;
      p.m = cfg.m;
      p.u = cfg.u;
      p.seed = cfg.seed;
      p.backend = b;
      p.inner = cfg.inner;
      const auto start = std::chrono::steady_clock::now();
      const NeighborhoodSet ns = build_neighborhoods(spec, p, workers);
      const std::chrono::duration<double> took =
          std::chrono::steady_clock::now() - start;
      rows.push_back({n, b, ns.distance_evaluations, took.count()});
    }
  }
  return rows;
}

inline std::string bench_to_csv(const std::vector<BenchRow>& rows) {
  std::string out = "n,backend,distance_evaluations,wall_seconds\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + ',' + to_string(r.backend) + ',' +
           std::to_string(r.evaluations) + ',' + format_number(r.seconds) + '\n';
  }
  return out;
}

}  // namespace rwn
