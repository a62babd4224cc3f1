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

// Monte Carlo check that, with q = 1, the joint distribution of a released
// bivariate sample approaches the original one as the radius shrinks.
//
// Per replication: draw n points from a standard bivariate normal with
// correlation rho, release them at each radius of the schedule, and take
// the largest gap between the two empirical joint CDFs over a grid of
// (a, b) points at the original marginal quantiles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rwn/dataset.hpp"
#include "rwn/distance.hpp"
#include "rwn/engine.hpp"
#include "rwn/error.hpp"
#include "rwn/linalg.hpp"
#include "rwn/neighborhoods.hpp"
#include "rwn/parallel.hpp"
#include "rwn/random.hpp"
#include "rwn/standardize.hpp"

namespace rwn {

enum class TheoremRelease {
  kNeighborhoods,  // RWN with q = 1
  // Negative control: every cell takes the value of an independently drawn
  // record from the whole dataset. Marginals survive, the joint does not.
  kGlobalDonors,
};

struct TheoremCheckConfig {
  double rho = 0.7;
  std::size_t n = 5000;
  std::vector<double> eps_schedule = {1.0, 0.5, 0.25, 0.1};
  std::uint32_t k = 3;
  std::size_t replications = 25;
  std::uint64_t seed = 0;
  std::size_t grid = 10;    // grid levels 0.05, 0.15, ..., 0.95 when 10
  double tolerance = 0.03;  // on the mean gap at the last radius
  double trend_slack = 0.005;
  TheoremRelease release = TheoremRelease::kNeighborhoods;

  void validate() const {
    if (!(std::abs(rho) < 1.0)) throw ConfigError("rho", "must satisfy |rho| < 1");
    if (n < 100) throw ConfigError("n", "must be >= 100");
    if (eps_schedule.size() < 3) {
      throw ConfigError("eps_schedule", "needs at least 3 radii");
    }
    for (double e : eps_schedule) {
      if (!std::isfinite(e) || e < 0) {
        throw ConfigError("eps_schedule", "radii must be finite and >= 0");
      }
    }
    if (replications == 0) throw ConfigError("replications", "must be >= 1");
    if (grid == 0) throw ConfigError("grid", "must be >= 1");
  }
};

struct TheoremStep {
  double eps = 0.0;
  double mean_gap = 0.0;
  double mean_correlation = 0.0;  // of the released sample
  double mean_neighborhood = 0.0;
  std::vector<double> gaps;  // per replication
  std::vector<double> correlations;
};

struct TheoremCheckResult {
  std::vector<TheoremStep> steps;
  double mean_original_correlation = 0.0;
  bool trend_ok = false;
  bool final_ok = false;
  bool passed() const { return trend_ok && final_ok; }
};

inline Dataset bivariate_normal(std::size_t n, double rho, std::uint64_t seed,
                                std::size_t rep) {
  CounterStream s(seed, Domain::kSynthetic, static_cast<std::uint32_t>(rep));
  const double c = std::sqrt(1.0 - rho * rho);
  std::vector<Cell> cells;
  cells.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z1 = s.normal();
    const double z2 = s.normal();
    cells.push_back(Cell::number(z1));
    cells.push_back(Cell::number(rho * z1 + c * z2));
  }
  return Dataset::create({{"u", ColumnKind::kNumeric, {}},
                          {"v", ColumnKind::kNumeric, {}}},
                         std::move(cells));
}

// max over the grid of |F_released(a, b) - F_original(a, b)|, skipping
// released rows with a missing cell.
inline double joint_cdf_gap(const Dataset& orig, const Dataset& released,
                            std::size_t grid) {
  std::vector<double> u, v;
  for (std::size_t i = 0; i < orig.rows(); ++i) {
    u.push_back(orig.at(i, 0).number_value());
    v.push_back(orig.at(i, 1).number_value());
  }
  std::vector<double> a(grid), b(grid);
  for (std::size_t g = 0; g < grid; ++g) {
    const double level = (static_cast<double>(g) + 0.5) / static_cast<double>(grid);
    a[g] = quantile(u, level);
    b[g] = quantile(v, level);
  }
  auto cdf = [&](const Dataset& d, std::vector<double>& f) {
    f.assign(grid * grid, 0.0);
    double count = 0;
    for (std::size_t i = 0; i < d.rows(); ++i) {
      if (d.at(i, 0).is_missing() || d.at(i, 1).is_missing()) continue;
      count += 1;
      const double x = d.at(i, 0).number_value();
      const double y = d.at(i, 1).number_value();
      for (std::size_t ga = 0; ga < grid; ++ga) {
        if (x > a[ga]) continue;
        for (std::size_t gb = 0; gb < grid; ++gb) {
          if (y <= b[gb]) f[ga * grid + gb] += 1;
        }
      }
    }
    for (double& x : f) x /= count;
  };
  std::vector<double> fo, fr;
  cdf(orig, fo);
  cdf(released, fr);
  double gap = 0.0;
  for (std::size_t g = 0; g < fo.size(); ++g) gap = std::max(gap, std::abs(fo[g] - fr[g]));
  return gap;
}

inline double sample_correlation(const Dataset& d) {
  double n = 0, mu = 0, mv = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (d.at(i, 0).is_missing() || d.at(i, 1).is_missing()) continue;
    n += 1;
    mu += d.at(i, 0).number_value();
    mv += d.at(i, 1).number_value();
  }
  mu /= n;
  mv /= n;
  double suu = 0, svv = 0, suv = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (d.at(i, 0).is_missing() || d.at(i, 1).is_missing()) continue;
    const double du = d.at(i, 0).number_value() - mu;
    const double dv = d.at(i, 1).number_value() - mv;
    suu += du * du;
    svv += dv * dv;
    suv += du * dv;
  }
  return suv / std::sqrt(suu * svv);
}

inline Dataset release_with_global_donors(const Dataset& d, std::uint64_t seed) {
  const std::size_t n = d.rows();
  std::vector<Cell> cells;
  cells.reserve(n * d.cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      CounterStream s(seed, Domain::kControl, static_cast<std::uint32_t>(i),
                      static_cast<std::uint32_t>(j));
      // uniform over the other n - 1 records
      std::size_t donor = static_cast<std::size_t>(s.below(n - 1));
      if (donor >= i) ++donor;
      cells.push_back(d.at(donor, j));
    }
  }
  return d.with_cells(std::move(cells));
}

inline TheoremCheckResult theorem_check(const TheoremCheckConfig& cfg,
                                        unsigned workers = 1) {
  cfg.validate();
  const std::size_t steps = cfg.eps_schedule.size();
  const std::size_t reps = cfg.replications;
  std::vector<std::vector<double>> gaps(steps, std::vector<double>(reps));
  std::vector<std::vector<double>> corrs(steps, std::vector<double>(reps));
  std::vector<std::vector<double>> sizes(steps, std::vector<double>(reps));
  std::vector<double> orig_corr(reps);

  // Replications run in parallel; within one, pair distances are computed
  // once and reused across the schedule.
  parallel_for(reps, workers, [&](std::size_t r) {
    const Dataset d = bivariate_normal(cfg.n, cfg.rho, cfg.seed, r);
    orig_corr[r] = sample_correlation(d);
    const StandardizedView view = standardize(d);
    const DistanceSpec spec(view);
    std::optional<PairDistanceCache> cache;
    if (cfg.release == TheoremRelease::kNeighborhoods) {
      cache.emplace(spec, PairDistanceCache::all_records(cfg.n));
    }
    for (std::size_t s = 0; s < steps; ++s) {
      const std::uint64_t seed = replicate_seed(cfg.seed ^ (s + 1), r);
      Dataset released = d;
      double mean_size = 0.0;
      if (cfg.release == TheoremRelease::kNeighborhoods) {
        NeighborhoodSet ns;
        ns.resize(cfg.n);
        cache->select_into(ns, cfg.eps_schedule[s], cfg.k);
        for (const auto& m : ns.members) mean_size += static_cast<double>(m.size());
        mean_size /= static_cast<double>(cfg.n);
        released = perturb(d, ns, 1.0, seed).released;
      } else {
        released = release_with_global_donors(d, seed);
        mean_size = static_cast<double>(cfg.n - 1);
      }
      gaps[s][r] = joint_cdf_gap(d, released, cfg.grid);
      corrs[s][r] = sample_correlation(released);
      sizes[s][r] = mean_size;
    }
  });

  TheoremCheckResult out;
  auto mean = [](const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
  };
  out.mean_original_correlation = mean(orig_corr);
  for (std::size_t s = 0; s < steps; ++s) {
    TheoremStep step;
    step.eps = cfg.eps_schedule[s];
    step.gaps = gaps[s];
    step.correlations = corrs[s];
    step.mean_gap = mean(gaps[s]);
    step.mean_correlation = mean(corrs[s]);
    step.mean_neighborhood = mean(sizes[s]);
    out.steps.push_back(std::move(step));
  }
  out.trend_ok =
      out.steps.back().mean_gap <= out.steps.front().mean_gap + cfg.trend_slack;
  out.final_ok = out.steps.back().mean_gap <= cfg.tolerance;
  return out;
}

}  // namespace rwn
