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

// Randomization within neighborhoods.
//
// For every record i and column j, independently: with probability 1 - q
// keep w_ij; with probability q replace it by column j of a record drawn
// uniformly from S_i. Each column draws its own donor, so two columns of
// the same record may (by chance) take values from the same neighbor.
// Records whose S_i is empty are released with every cell missing.
//
// The coin and the donor of cell (i, j) come from two disjoint counter
// streams addressed by (seed, i, j); the output is a pure function of
// (data, neighborhoods, q, seed).

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "rwn/dataset.hpp"
#include "rwn/distance.hpp"
#include "rwn/error.hpp"
#include "rwn/neighborhoods.hpp"
#include "rwn/parallel.hpp"
#include "rwn/random.hpp"
#include "rwn/standardize.hpp"

namespace rwn {

struct RwnConfig {
  double eps = 0.0;
  std::uint32_t k = 0;
  double q = 1.0;
  std::uint64_t seed = 0;
  Backend backend = Backend::kExact;
  Backend inner = Backend::kExact;
  std::uint64_t m = 0;
  std::uint32_t u = 1;
  bool fresh_pool_per_point = false;
  std::vector<double> weights;  // empty: all ones

  // Checks every constraint that does not depend on the data.
  void validate() const {
    if (!std::isfinite(eps) || eps < 0.0) {
      throw ConfigError("eps", "must be a finite value >= 0");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
      throw ConfigError("q", "must lie in [0, 1]");
    }
    const bool needs_m = backend == Backend::kPool ||
                         backend == Backend::kPairSample ||
                         (backend == Backend::kPartitioned &&
                          inner != Backend::kExact);
    if (needs_m && m < 1) {
      throw ConfigError("m", "must be >= 1 for the " +
                                 std::string(to_string(backend)) + " backend");
    }
    if (backend == Backend::kPartitioned) {
      if (u < 1) throw ConfigError("u", "must be >= 1");
      if (inner == Backend::kPartitioned) {
        throw ConfigError("inner", "must be exact, pool or pair-sample");
      }
    }
    for (double w : weights) {
      if (!std::isfinite(w) || w < 0.0) {
        throw ConfigError("weights", "must be finite and >= 0");
      }
    }
  }

  NeighborhoodParams neighborhood_params() const {
    NeighborhoodParams p;
    p.eps = eps;
    p.k = k;
    p.m = m;
    p.u = u;
    p.fresh_pool_per_point = fresh_pool_per_point;
    p.seed = seed;
    p.backend = backend;
    p.inner = inner;
    return p;
  }
};

struct PerturbedDataset {
  Dataset released;
  std::vector<std::uint8_t> modified;   // n*p, row-major
  std::vector<std::uint8_t> nullified;  // n

  bool is_modified(std::size_t i, std::size_t j) const {
    return modified[i * released.cols() + j] != 0;
  }
  std::size_t modified_count() const {
    std::size_t c = 0;
    for (auto f : modified) c += f;
    return c;
  }
  std::vector<std::size_t> nullified_records() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nullified.size(); ++i) {
      if (nullified[i]) out.push_back(i);
    }
    return out;
  }
};

// Whether cell (i, j) is modified, and if so which member of S_i donates.
// Exposed so tests can replay individual draws.
struct CellDraw {
  bool modify;
  std::size_t donor_slot;  // index into S_i; meaningful when modify
};

inline CellDraw draw_cell(std::uint64_t seed, std::size_t i, std::size_t j,
                          double q, std::size_t neighborhood_size) {
  CounterStream coin(seed, Domain::kCellCoin, static_cast<std::uint32_t>(i),
                     static_cast<std::uint32_t>(j));
  CellDraw d{coin.bernoulli(q), 0};
  if (d.modify) {
    CounterStream donor(seed, Domain::kCellDonor,
                        static_cast<std::uint32_t>(i),
                        static_cast<std::uint32_t>(j));
    d.donor_slot = static_cast<std::size_t>(donor.below(neighborhood_size));
  }
  return d;
}

inline PerturbedDataset perturb(const Dataset& d, const NeighborhoodSet& ns,
                                double q, std::uint64_t seed,
                                unsigned workers = 1) {
  if (ns.size() != d.rows()) {
    throw DataError("neighborhoods cover " + std::to_string(ns.size()) +
                    " records, dataset has " + std::to_string(d.rows()));
  }
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("q", "must lie in [0, 1]");
  if (d.rows() > UINT32_MAX || d.cols() > UINT32_MAX) {
    throw DataError("dataset too large for 32-bit stream addressing");
  }
  const std::size_t n = d.rows();
  const std::size_t p = d.cols();
  std::vector<Cell> out(d.cells().begin(), d.cells().end());
  std::vector<std::uint8_t> modified(n * p, 0);
  std::vector<std::uint8_t> nullified(n, 0);

  parallel_for(n, workers, [&](std::size_t i) {
    const auto& s = ns.members[i];
    for (std::uint32_t member : s) {
      if (member == i || member >= n) {
        throw DataError("neighborhood of record " + std::to_string(i) +
                        " is malformed");
      }
    }
    if (s.empty()) {
      nullified[i] = 1;
      for (std::size_t j = 0; j < p; ++j) out[i * p + j] = Cell::missing();
      return;
    }
    for (std::size_t j = 0; j < p; ++j) {
      const CellDraw draw = draw_cell(seed, i, j, q, s.size());
      if (!draw.modify) continue;
      modified[i * p + j] = 1;
      out[i * p + j] = d.at(s[draw.donor_slot], j);
    }
  });
  return {d.with_cells(std::move(out)), std::move(modified),
          std::move(nullified)};
}

inline PerturbedDataset perturb(const Dataset& d, const NeighborhoodSet& ns,
                                const RwnConfig& cfg, unsigned workers = 1) {
  return perturb(d, ns, cfg.q, cfg.seed, workers);
}

// Checks that `out` could have come from `d` and `ns`: modified cells hold
// a value of the same column of some member of S_i, unmodified cells are
// untouched, and exactly the records with empty S_i are nullified (all
// cells missing).
inline bool provenance_check(const Dataset& d, const PerturbedDataset& out,
                             const NeighborhoodSet& ns) {
  const Dataset& w = out.released;
  if (w.schema() != d.schema() || w.rows() != d.rows() ||
      ns.size() != d.rows() || out.modified.size() != d.rows() * d.cols() ||
      out.nullified.size() != d.rows()) {
    return false;
  }
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const auto& s = ns.members[i];
    if (out.nullified[i] != (s.empty() ? 1 : 0)) return false;
    for (std::size_t j = 0; j < d.cols(); ++j) {
      const Cell& released = w.at(i, j);
      if (s.empty()) {
        if (!released.is_missing()) return false;
        continue;
      }
      if (!out.is_modified(i, j)) {
        if (!(released == d.at(i, j))) return false;
        continue;
      }
      bool found = false;
      for (std::uint32_t member : s) {
        if (member != i && member < d.rows() && d.at(member, j) == released) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
  }
  return true;
}

// Seed of the release applied in replication `rep` of an experiment.
inline std::uint64_t replicate_seed(std::uint64_t seed, std::size_t rep) {
  CounterStream s(seed, Domain::kReplicate, static_cast<std::uint32_t>(rep));
  return s();
}

struct RwnRun {
  NeighborhoodSet neighborhoods;
  PerturbedDataset output;
};

// Standardize, build neighborhoods with cfg's backend, perturb.
inline RwnRun run_rwn(const Dataset& d, const RwnConfig& cfg,
                      unsigned workers = 1) {
  cfg.validate();
  const StandardizedView view = standardize(d);
  const DistanceSpec spec(view, cfg.weights);
  NeighborhoodSet ns = build_neighborhoods(spec, cfg.neighborhood_params(),
                                           workers);
  PerturbedDataset out = perturb(d, ns, cfg, workers);
  return {std::move(ns), std::move(out)};
}

}  // namespace rwn
