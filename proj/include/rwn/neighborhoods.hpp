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

// Neighborhood construction.
//
// For each record i the neighborhood S_i is the larger of
//   * the eps-ball: every other record at distance <= eps, and
//   * the k nearest other records (ties at the k-th distance go to the
//     smaller row index),
// with the eps-ball kept when both have the same cardinality. Four
// backends differ only in which candidates are looked at:
//
//   exact        every other record; n(n-1)/2 distance evaluations
//   pool         a random pool of m records (shared, or fresh per record);
//                at most m*n evaluations
//   pair-sample  ceil(n*m/2) random pairs drawn from the strict triangle
//                of the distance matrix; one evaluation per pair
//   partitioned  a seeded split into u parts, any of the above inside
//                each part
//
// Randomness comes from counter streams keyed by (seed, partition) or
// (seed, partition, record), so results do not depend on worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rwn/distance.hpp"
#include "rwn/error.hpp"
#include "rwn/io.hpp"
#include "rwn/parallel.hpp"
#include "rwn/random.hpp"
#include "rwn/sampling.hpp"
#include "rwn/triangular.hpp"

namespace rwn {

enum class Backend : std::uint8_t { kExact, kPool, kPairSample, kPartitioned };

inline const char* to_string(Backend b) {
  switch (b) {
    case Backend::kExact: return "exact";
    case Backend::kPool: return "pool";
    case Backend::kPairSample: return "pair-sample";
    case Backend::kPartitioned: return "partitioned";
  }
  return "?";
}

inline std::optional<Backend> parse_backend(std::string_view name) {
  if (name == "exact") return Backend::kExact;
  if (name == "pool") return Backend::kPool;
  if (name == "pair-sample" || name == "pair_sample") return Backend::kPairSample;
  if (name == "partitioned") return Backend::kPartitioned;
  return std::nullopt;
}

// Which of the two candidate sets became S_i.
enum class NeighborRule : std::uint8_t { kEpsBall, kNearestK };

struct NeighborhoodParams {
  double eps = 0.0;
  std::uint32_t k = 0;
  std::uint64_t m = 0;  // pool size (pool) or per-record target (pair-sample)
  std::uint32_t u = 1;  // partitions
  bool fresh_pool_per_point = false;
  std::uint64_t seed = 0;
  Backend backend = Backend::kExact;
  Backend inner = Backend::kExact;  // used when backend == kPartitioned
};

struct NeighborhoodSet {
  // S_i as ascending row indices; never contains i.
  std::vector<std::vector<std::uint32_t>> members;
  std::vector<NeighborRule> rule;
  // Smallest distance among the candidates evaluated for i (+inf if none).
  std::vector<double> nearest_candidate;
  NeighborhoodParams params;
  std::uint64_t distance_evaluations = 0;
  // One entry per partition (a single entry when not partitioned).
  std::vector<std::uint64_t> partition_evaluations;

  std::size_t size() const { return members.size(); }

  void resize(std::size_t n) {
    members.assign(n, {});
    rule.assign(n, NeighborRule::kEpsBall);
    nearest_candidate.assign(n, std::numeric_limits<double>::infinity());
  }
};

// Distance evaluations performed by the build that produced `ns`.
inline std::uint64_t pairwise_count(const NeighborhoodSet& ns) {
  return ns.distance_evaluations;
}

struct Candidate {
  double distance;
  std::uint32_t index;
};

inline bool candidate_less(const Candidate& a, const Candidate& b) {
  return a.distance < b.distance ||
         (a.distance == b.distance && a.index < b.index);
}

// Applies the "whichever set is larger" rule to the candidates of one
// record (the record itself must not be among them). Reorders `cands`.
inline void select_neighbors(std::vector<Candidate>& cands, double eps,
                             std::uint32_t k, std::vector<std::uint32_t>& out,
                             NeighborRule& rule, double& nearest) {
  out.clear();
  nearest = std::numeric_limits<double>::infinity();
  std::size_t ball = 0;
  for (const Candidate& c : cands) {
    if (c.distance <= eps) ++ball;
    nearest = std::min(nearest, c.distance);
  }
  const std::size_t knn = std::min<std::size_t>(k, cands.size());
  if (ball >= knn) {
    rule = NeighborRule::kEpsBall;
    out.reserve(ball);
    for (const Candidate& c : cands) {
      if (c.distance <= eps) out.push_back(c.index);
    }
  } else {
    rule = NeighborRule::kNearestK;
    std::nth_element(cands.begin(), cands.begin() + (knn - 1), cands.end(),
                     candidate_less);
    out.reserve(knn);
    for (std::size_t r = 0; r < knn; ++r) out.push_back(cands[r].index);
  }
  std::sort(out.begin(), out.end());
}

// Distances between all pairs of a record subset, computed once each and
// stored in the strict lower triangle: pair (a, b), a < b, lives at
// b(b-1)/2 + a, i.e. encode_rank(a+1, b+1) - 1.
class PairDistanceCache {
 public:
  PairDistanceCache(const DistanceSpec& spec,
                    std::vector<std::uint32_t> records, unsigned workers = 1)
      : records_(std::move(records)) {
    const std::size_t s = records_.size();
    tri_.resize(pair_count(s));
    parallel_for(s > 0 ? s - 1 : 0, workers, [&](std::size_t row) {
      const std::size_t b = row + 1;
      double* out = tri_.data() + b * (b - 1) / 2;
      for (std::size_t a = 0; a < b; ++a) {
        out[a] = spec(records_[a], records_[b]);
      }
    });
  }

  static std::vector<std::uint32_t> all_records(std::size_t n) {
    std::vector<std::uint32_t> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = static_cast<std::uint32_t>(i);
    return r;
  }

  std::size_t size() const { return records_.size(); }
  std::uint64_t evaluations() const { return tri_.size(); }
  const std::vector<std::uint32_t>& records() const { return records_; }

  double local(std::size_t a, std::size_t b) const {
    if (a == b) return 0.0;
    if (a > b) std::swap(a, b);
    return tri_[b * (b - 1) / 2 + a];
  }

  // Writes S_i for every record of the subset into `ns` (global slots).
  void select_into(NeighborhoodSet& ns, double eps, std::uint32_t k,
                   unsigned workers = 1) const {
    const std::size_t s = records_.size();
    if (s > 0 && k > s - 1) {
      throw ConfigError("k", "k = " + std::to_string(k) +
                                 " exceeds the number of other records (" +
                                 std::to_string(s - 1) + ")");
    }
    parallel_chunks(s, workers, [&](std::size_t begin, std::size_t end,
                                    unsigned) {
      std::vector<Candidate> cands;
      cands.reserve(s);
      for (std::size_t a = begin; a < end; ++a) {
        cands.clear();
        for (std::size_t b = 0; b < s; ++b) {
          if (b != a) cands.push_back({local(a, b), records_[b]});
        }
        const std::uint32_t g = records_[a];
        select_neighbors(cands, eps, k, ns.members[g], ns.rule[g],
                         ns.nearest_candidate[g]);
      }
    });
  }

 private:
  std::vector<std::uint32_t> records_;
  std::vector<double> tri_;
};

// Exact backend. Every unordered pair is evaluated exactly once.
inline NeighborhoodSet build_exact(const DistanceSpec& spec, double eps,
                                   std::uint32_t k, unsigned workers = 1) {
  if (!(eps >= 0.0)) throw ConfigError("eps", "must be >= 0");
  const std::size_t n = spec.rows();
  if (n > 0 && k > n - 1) {
    throw ConfigError("k", "k = " + std::to_string(k) +
                               " exceeds n - 1 = " + std::to_string(n - 1));
  }
  PairDistanceCache cache(spec, PairDistanceCache::all_records(n), workers);
  NeighborhoodSet ns;
  ns.resize(n);
  cache.select_into(ns, eps, k, workers);
  ns.params.eps = eps;
  ns.params.k = k;
  ns.params.backend = Backend::kExact;
  ns.distance_evaluations = cache.evaluations();
  ns.partition_evaluations = {cache.evaluations()};
  return ns;
}

namespace detail {

// Pool backend over a record subset; returns distance evaluations.
inline std::uint64_t pool_into(const DistanceSpec& spec,
                               std::span<const std::uint32_t> records,
                               double eps, std::uint32_t k, std::uint64_t m,
                               bool fresh, std::uint64_t seed,
                               std::uint32_t scope, unsigned workers,
                               NeighborhoodSet& ns) {
  const std::size_t s = records.size();
  if (m == 0) throw ConfigError("m", "pool size must be >= 1");
  if (m > s) {
    throw ConfigError("m", "pool size " + std::to_string(m) +
                               " exceeds the " + std::to_string(s) +
                               " available records");
  }
  auto draw_pool = [&](CounterStream stream) {
    auto positions = sample_distinct(stream, s, m);
    std::vector<std::uint32_t> pool(positions.size());
    for (std::size_t t = 0; t < positions.size(); ++t) {
      pool[t] = records[positions[t]];
    }
    return pool;
  };
  std::vector<std::uint32_t> shared;
  if (!fresh) shared = draw_pool(CounterStream(seed, Domain::kSharedPool, scope));

  std::vector<std::uint64_t> evaluated(s, 0);
  parallel_chunks(s, workers, [&](std::size_t begin, std::size_t end,
                                  unsigned) {
    std::vector<Candidate> cands;
    for (std::size_t a = begin; a < end; ++a) {
      const std::uint32_t g = records[a];
      const std::vector<std::uint32_t> pool =
          fresh ? draw_pool(CounterStream(seed, Domain::kFreshPool, scope, g))
                : std::vector<std::uint32_t>{};
      const std::vector<std::uint32_t>& use = fresh ? pool : shared;
      cands.clear();
      for (std::uint32_t c : use) {
        if (c != g) cands.push_back({spec(g, c), c});
      }
      evaluated[a] = cands.size();
      select_neighbors(cands, eps, k, ns.members[g], ns.rule[g],
                       ns.nearest_candidate[g]);
    }
  });
  std::uint64_t total = 0;
  for (auto e : evaluated) total += e;
  return total;
}

}  // namespace detail

// Pool backend: candidates for every record come from a random pool of m
// records (excluding the record itself if pooled). With
// `fresh_pool_per_point` each record draws its own pool.
inline NeighborhoodSet build_pool(const DistanceSpec& spec, double eps,
                                  std::uint32_t k, std::uint64_t m,
                                  bool fresh_pool_per_point, std::uint64_t seed,
                                  unsigned workers = 1) {
  if (!(eps >= 0.0)) throw ConfigError("eps", "must be >= 0");
  const std::size_t n = spec.rows();
  NeighborhoodSet ns;
  ns.resize(n);
  const auto all = PairDistanceCache::all_records(n);
  ns.distance_evaluations = detail::pool_into(
      spec, all, eps, k, m, fresh_pool_per_point, seed, 0, workers, ns);
  ns.partition_evaluations = {ns.distance_evaluations};
  ns.params.eps = eps;
  ns.params.k = k;
  ns.params.m = m;
  ns.params.fresh_pool_per_point = fresh_pool_per_point;
  ns.params.seed = seed;
  ns.params.backend = Backend::kPool;
  return ns;
}

// A uniform sample of distinct pair ranks, without replacement.
struct PairSample {
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  std::uint64_t sample_size = 0;     // ceil(n*m/2)
  std::vector<std::uint64_t> ranks;  // ascending, in [1, n(n-1)/2]
  std::vector<RankPair> pairs;       // decode_rank(ranks[t]), 1-based
};

inline std::uint64_t pair_sample_size(std::uint64_t n, std::uint64_t m) {
  return (n * m + 1) / 2;
}

inline PairSample sample_pairs(std::uint64_t n, std::uint64_t m,
                               std::uint64_t seed, std::uint32_t scope = 0) {
  if (n < 2) throw DataError("pair sampling needs at least 2 records");
  if (m == 0) throw ConfigError("m", "per-record sample target must be >= 1");
  PairSample out;
  out.n = n;
  out.m = m;
  out.sample_size = pair_sample_size(n, m);
  const std::uint64_t total = pair_count(n);
  if (out.sample_size > total) {
    throw ConfigError("m", "pair sample size ceil(n*m/2) = " +
                               std::to_string(out.sample_size) +
                               " exceeds the " + std::to_string(total) +
                               " available pairs");
  }
  CounterStream stream(seed, Domain::kPairSample, scope);
  out.ranks = sample_distinct(stream, total, out.sample_size);
  out.pairs.reserve(out.ranks.size());
  for (auto& r : out.ranks) {
    ++r;  // [0, total) -> [1, total]
    out.pairs.push_back(decode_rank(r));
  }
  return out;
}

struct GraphEdge {
  std::uint32_t a;  // row indices, a < b
  std::uint32_t b;
  double distance;
};

// Undirected graph over all n records whose edges are the sampled pairs,
// each carrying its distance. Adjacency is stored in CSR form.
class DistanceGraph {
 public:
  DistanceGraph(std::size_t n, std::vector<GraphEdge> edges)
      : n_(n), edges_(std::move(edges)), offsets_(n + 1, 0) {
    for (const auto& e : edges_) {
      if (e.a == e.b) throw DataError("distance graph: self-loop");
      if (e.a >= n_ || e.b >= n_) throw DataError("distance graph: bad node");
      ++offsets_[e.a + 1];
      ++offsets_[e.b + 1];
    }
    for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
    adjacent_.resize(offsets_[n_]);
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& e : edges_) {
      adjacent_[cursor[e.a]++] = {e.distance, e.b};
      adjacent_[cursor[e.b]++] = {e.distance, e.a};
    }
  }

  std::size_t nodes() const { return n_; }
  const std::vector<GraphEdge>& edges() const { return edges_; }
  std::span<const Candidate> incident(std::size_t i) const {
    return {adjacent_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

 private:
  std::size_t n_;
  std::vector<GraphEdge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<Candidate> adjacent_;
};

// Evaluates the distance of every sampled pair. `records` maps the
// sample's 1-based positions onto row indices (identity when empty).
inline DistanceGraph build_graph(const DistanceSpec& spec,
                                 const PairSample& sample,
                                 std::span<const std::uint32_t> records = {},
                                 unsigned workers = 1) {
  if (records.empty() && sample.n != spec.rows()) {
    throw DataError("pair sample was drawn for a different record count");
  }
  auto row = [&](std::uint64_t pos) -> std::uint32_t {
    return records.empty() ? static_cast<std::uint32_t>(pos - 1)
                           : records[pos - 1];
  };
  std::vector<GraphEdge> edges(sample.pairs.size());
  parallel_for(edges.size(), workers, [&](std::size_t t) {
    std::uint32_t a = row(sample.pairs[t].i);
    std::uint32_t b = row(sample.pairs[t].j);
    if (a > b) std::swap(a, b);
    edges[t] = {a, b, spec(a, b)};
  });
  return DistanceGraph(spec.rows(), std::move(edges));
}

namespace detail {

inline void select_from_graph(const DistanceGraph& g,
                              std::span<const std::uint32_t> records,
                              double eps, std::uint32_t k, unsigned workers,
                              NeighborhoodSet& ns) {
  parallel_chunks(records.size(), workers,
                  [&](std::size_t begin, std::size_t end, unsigned) {
                    std::vector<Candidate> cands;
                    for (std::size_t a = begin; a < end; ++a) {
                      const std::uint32_t i = records[a];
                      auto inc = g.incident(i);
                      cands.assign(inc.begin(), inc.end());
                      select_neighbors(cands, eps, k, ns.members[i], ns.rule[i],
                                       ns.nearest_candidate[i]);
                    }
                  });
}

inline std::uint64_t pair_sample_into(const DistanceSpec& spec,
                                      std::span<const std::uint32_t> records,
                                      double eps, std::uint32_t k,
                                      std::uint64_t m, std::uint64_t seed,
                                      std::uint32_t scope, unsigned workers,
                                      NeighborhoodSet& ns) {
  const PairSample sample = sample_pairs(records.size(), m, seed, scope);
  const DistanceGraph g = build_graph(spec, sample, records, workers);
  select_from_graph(g, records, eps, k, workers, ns);
  return sample.sample_size;
}

}  // namespace detail

// Neighborhoods restricted to each record's incident sampled edges. A
// record with no incident edge gets an empty S_i.
inline NeighborhoodSet build_from_graph(const DistanceGraph& g, double eps,
                                        std::uint32_t k, unsigned workers = 1) {
  NeighborhoodSet ns;
  ns.resize(g.nodes());
  const auto all = PairDistanceCache::all_records(g.nodes());
  detail::select_from_graph(g, all, eps, k, workers, ns);
  ns.params.eps = eps;
  ns.params.k = k;
  ns.params.backend = Backend::kPairSample;
  return ns;
}

inline NeighborhoodSet build_pair_sample(const DistanceSpec& spec, double eps,
                                         std::uint32_t k, std::uint64_t m,
                                         std::uint64_t seed,
                                         unsigned workers = 1) {
  if (!(eps >= 0.0)) throw ConfigError("eps", "must be >= 0");
  NeighborhoodSet ns;
  ns.resize(spec.rows());
  const auto all = PairDistanceCache::all_records(spec.rows());
  ns.distance_evaluations =
      detail::pair_sample_into(spec, all, eps, k, m, seed, 0, workers, ns);
  ns.partition_evaluations = {ns.distance_evaluations};
  ns.params.eps = eps;
  ns.params.k = k;
  ns.params.m = m;
  ns.params.seed = seed;
  ns.params.backend = Backend::kPairSample;
  return ns;
}

// Seeded split of [0, n) into u parts of size floor(n/u) or ceil(n/u),
// each sorted ascending.
inline std::vector<std::vector<std::uint32_t>> make_partitions(
    std::size_t n, std::uint32_t u, std::uint64_t seed) {
  if (u == 0) throw ConfigError("u", "partition count must be >= 1");
  if (u > n) {
    throw ConfigError("u", "partition count " + std::to_string(u) +
                               " exceeds the " + std::to_string(n) +
                               " records");
  }
  auto perm = PairDistanceCache::all_records(n);
  CounterStream stream(seed, Domain::kPartition);
  shuffle_in_place(perm, stream);
  std::vector<std::vector<std::uint32_t>> parts(u);
  for (std::uint32_t p = 0; p < u; ++p) {
    const std::size_t begin = n * p / u;
    const std::size_t end = n * (p + 1) / u;
    parts[p].assign(perm.begin() + begin, perm.begin() + end);
    std::sort(parts[p].begin(), parts[p].end());
  }
  return parts;
}

// Partitioned backend: neighborhoods are built independently inside each
// part with `params.inner`; indices stay global. Partition p draws its
// randomness from scope p, so u = 1 reproduces the inner backend.
inline NeighborhoodSet build_partitioned(const DistanceSpec& spec,
                                         const NeighborhoodParams& params,
                                         unsigned workers = 1) {
  if (!(params.eps >= 0.0)) throw ConfigError("eps", "must be >= 0");
  if (params.inner == Backend::kPartitioned) {
    throw ConfigError("inner", "partitioned backend cannot nest itself");
  }
  const std::size_t n = spec.rows();
  const auto parts = make_partitions(n, params.u, params.seed);
  for (const auto& part : parts) {
    if (part.size() < 2) {
      throw ConfigError("u", "partition of size " +
                                 std::to_string(part.size()) +
                                 " cannot form pairs; use fewer partitions");
    }
  }
  NeighborhoodSet ns;
  ns.resize(n);
  ns.params = params;
  ns.params.backend = Backend::kPartitioned;
  for (std::uint32_t p = 0; p < parts.size(); ++p) {
    const auto& part = parts[p];
    std::uint64_t evals = 0;
    switch (params.inner) {
      case Backend::kExact: {
        PairDistanceCache cache(spec, part, workers);
        cache.select_into(ns, params.eps, params.k, workers);
        evals = cache.evaluations();
        break;
      }
      case Backend::kPool:
        evals = detail::pool_into(spec, part, params.eps, params.k, params.m,
                                  params.fresh_pool_per_point, params.seed, p,
                                  workers, ns);
        break;
      case Backend::kPairSample:
        evals = detail::pair_sample_into(spec, part, params.eps, params.k,
                                         params.m, params.seed, p, workers, ns);
        break;
      case Backend::kPartitioned:
        break;
    }
    ns.partition_evaluations.push_back(evals);
    ns.distance_evaluations += evals;
  }
  return ns;
}

// Dispatches on params.backend.
inline NeighborhoodSet build_neighborhoods(const DistanceSpec& spec,
                                           const NeighborhoodParams& params,
                                           unsigned workers = 1) {
  NeighborhoodSet ns;
  switch (params.backend) {
    case Backend::kExact:
      ns = build_exact(spec, params.eps, params.k, workers);
      break;
    case Backend::kPool:
      ns = build_pool(spec, params.eps, params.k, params.m,
                      params.fresh_pool_per_point, params.seed, workers);
      break;
    case Backend::kPairSample:
      ns = build_pair_sample(spec, params.eps, params.k, params.m, params.seed,
                             workers);
      break;
    case Backend::kPartitioned:
      return build_partitioned(spec, params, workers);
  }
  ns.params = params;
  return ns;
}

struct ProfileRow {
  std::size_t record;
  double min_distance;
  std::size_t neighborhood_size;
};

// Distance from each record to its nearest other record (over all
// records), next to |S_i|.
inline std::vector<ProfileRow> min_distance_profile(const DistanceSpec& spec,
                                                    const NeighborhoodSet& ns,
                                                    unsigned workers = 1) {
  const std::size_t n = spec.rows();
  if (n < 2) throw DataError("minimum distance needs at least 2 records");
  if (ns.size() != n) throw DataError("neighborhoods built for another dataset");
  std::vector<ProfileRow> rows(n);
  parallel_for(n, workers, [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) best = std::min(best, spec(i, j));
    }
    rows[i] = {i, best, ns.members[i].size()};
  });
  return rows;
}

// Same table from the candidates the backend actually evaluated.
inline std::vector<ProfileRow> min_distance_profile(const NeighborhoodSet& ns) {
  if (ns.size() < 2) throw DataError("minimum distance needs at least 2 records");
  std::vector<ProfileRow> rows(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    rows[i] = {i, ns.nearest_candidate[i], ns.members[i].size()};
  }
  return rows;
}

inline std::string profile_to_csv(const std::vector<ProfileRow>& rows) {
  std::string out = "record_index,min_distance,neighborhood_size\n";
  for (const auto& r : rows) {
    out += std::to_string(r.record);
    out += ',';
    out += std::isfinite(r.min_distance) ? format_number(r.min_distance)
                                         : std::string("NA");
    out += ',';
    out += std::to_string(r.neighborhood_size);
    out += '\n';
  }
  return out;
}

}  // namespace rwn
