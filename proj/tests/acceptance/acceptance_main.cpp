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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Thresholds are the constants at the top of each check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rwn/bench.hpp"
#include "rwn/classify.hpp"
#include "rwn/engine.hpp"
#include "rwn/io.hpp"
#include "rwn/metrics.hpp"
#include "rwn/theorem.hpp"
#include "rwn/triangular.hpp"
#include "test_util.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Triangular decoder against enumeration.

Outcome triangular_bijection() {
  constexpr std::uint64_t kMaxN = 2000;
  constexpr double kMaxSeconds = 10.0;
  const auto start = Clock::now();
  std::uint64_t rank = 0, mismatches = 0;
  for (std::uint64_t j = 2; j <= kMaxN; ++j) {
    for (std::uint64_t i = 1; i < j; ++i) {
      ++rank;
      if (rwn::encode_rank(i, j) != rank) ++mismatches;
      const rwn::RankPair p = rwn::decode_rank(rank);
      if (p.i != i || p.j != j) ++mismatches;
    }
  }
  const bool count_ok = rank == rwn::pair_count(kMaxN);
  const double took = seconds_since(start);
  return {mismatches == 0 && count_ok && took < kMaxSeconds,
          std::to_string(rank) + " ranks, " + std::to_string(mismatches) +
              " mismatches, " + fmt("%.2f s", took)};
}

// ---------------------------------------------------------------------------
// 2. q = 0 returns the input bit for bit.

Outcome zero_probability_identity() {
  constexpr int kDatasets = 100;
  int failures = 0;
  for (int s = 0; s < kDatasets; ++s) {
    const auto seed = static_cast<std::uint64_t>(s);
    const rwn::Dataset d = rwn::testing::random_dataset(
        seed, {.rows = 10 + seed % 90,
               .numeric = 1 + seed % 4,
               .categorical = seed % 3,
               .missing_rate = 0.05 * static_cast<double>(seed % 4),
               .decimals = static_cast<int>(seed % 6)});
    rwn::RwnConfig cfg;
    cfg.q = 0.0;
    cfg.eps = 0.1 * static_cast<double>(seed % 7);
    cfg.k = 1 + static_cast<std::uint32_t>(seed % 5);
    cfg.seed = seed * 1000003;
    cfg.backend = static_cast<rwn::Backend>(seed % 4);
    // A pair-sample graph this dense leaves no record without a neighbor;
    // an empty neighborhood nullifies the record whatever q is.
    cfg.m = std::min<std::uint64_t>(20, d.rows() - 1);
    cfg.u = 2;
    const rwn::RwnRun run = rwn::run_rwn(d, cfg);
    bool same = rwn::to_csv(run.output.released) == rwn::to_csv(d);
    for (std::size_t i = 0; i < d.rows(); ++i) {
      for (std::size_t j = 0; j < d.cols(); ++j) {
        same = same && run.output.released.at(i, j) == d.at(i, j);
      }
    }
    if (!same || run.output.modified_count() != 0) ++failures;
  }
  return {failures == 0,
          std::to_string(kDatasets - failures) + "/" + std::to_string(kDatasets) +
              " datasets unchanged"};
}

// ---------------------------------------------------------------------------
// 3. Every released value traces back to a neighbor.

Outcome provenance() {
  constexpr int kRuns = 1000;
  int failures = 0;
  for (int r = 0; r < kRuns; ++r) {
    const auto seed = static_cast<std::uint64_t>(r) + 5000;
    const rwn::Dataset d = rwn::testing::random_dataset(
        seed, {.rows = 8 + seed % 60,
               .numeric = 1 + seed % 3,
               .categorical = seed % 2,
               .missing_rate = 0.05 * static_cast<double>(seed % 3)});
    rwn::RwnConfig cfg;
    cfg.backend = static_cast<rwn::Backend>(r % 4);
    cfg.inner = static_cast<rwn::Backend>((r / 4) % 3);
    cfg.eps = 0.2 * static_cast<double>(seed % 6);
    cfg.k = static_cast<std::uint32_t>(seed % 4);
    cfg.q = 0.1 + 0.9 * static_cast<double>(seed % 10) / 9.0;
    cfg.m = 1 + seed % 4;
    cfg.u = 1 + static_cast<std::uint32_t>(seed % 3);
    cfg.fresh_pool_per_point = (seed / 3) % 2;
    cfg.seed = seed;
    const rwn::RwnRun run = rwn::run_rwn(d, cfg);
    if (!rwn::provenance_check(d, run.output, run.neighborhoods)) ++failures;
  }
  return {failures == 0, std::to_string(kRuns - failures) + "/" +
                             std::to_string(kRuns) + " runs traced, 4 backends"};
}

// ---------------------------------------------------------------------------
// 4. Joint distribution recovered as the radius shrinks.

Outcome theorem_reproduction() {
  constexpr double kGapTolerance = 0.03;
  constexpr double kCorrTolerance = 0.05;
  constexpr double kMaxSeconds = 120.0;
  const auto start = Clock::now();
  rwn::TheoremCheckConfig cfg;
  cfg.rho = 0.7;
  cfg.n = 5000;
  cfg.k = 3;
  cfg.eps_schedule = {1.0, 0.5, 0.25, 0.1};
  cfg.replications = 25;
  cfg.seed = 20240;
  cfg.tolerance = kGapTolerance;
  const rwn::TheoremCheckResult res = rwn::theorem_check(cfg, rwn::default_workers());
  const double took = seconds_since(start);

  // Noise floor of the statistic: two independent samples of the same law.
  double floor = 0.0;
  for (std::size_t r = 0; r < 5; ++r) {
    floor += rwn::joint_cdf_gap(rwn::bivariate_normal(cfg.n, cfg.rho, 1, r),
                                rwn::bivariate_normal(cfg.n, cfg.rho, 2, r), cfg.grid);
  }
  floor /= 5.0;

  std::string detail = "gap by eps:";
  for (const auto& s : res.steps) {
    detail += fmt(" %.3g", s.eps) + fmt("->%.4f", s.mean_gap);
  }
  const double corr = res.steps.back().mean_correlation;
  detail += fmt("; corr(W')=%.4f", corr) + fmt(" (W %.4f)", res.mean_original_correlation) +
            fmt("; two-sample noise floor %.4f", floor) + fmt("; %.1f s", took);
  return {res.passed() && std::abs(corr - cfg.rho) <= kCorrTolerance && took < kMaxSeconds,
          detail};
}

// ---------------------------------------------------------------------------
// 5 and 6. Body fat data.

std::optional<rwn::Dataset> load_bodyfat(std::string& note) {
  std::string path;
  if (const char* env = std::getenv("RWN_BODYFAT_CSV")) path = env;
  if (path.empty()) path = std::string(RWN_DATA_DIR) + "/bodyfat.csv";
  if (!std::filesystem::exists(path)) {
    note = "cleaned body fat CSV not found (set RWN_BODYFAT_CSV or add " + path + ")";
    return std::nullopt;
  }
  rwn::Dataset d = rwn::load_csv(path);
  // Keep a single body-fat estimate.
  for (const char* drop : {"brozek", "density", "case"}) {
    if (auto j = d.column_index(drop)) d = rwn::drop_column(d, *j);
  }
  if (!d.column_index("bmi")) {
    const auto w = d.column_index("weight");
    const auto h = d.column_index("height");
    if (!w || !h) {
      note = "body fat CSV lacks bmi (or weight and height)";
      return std::nullopt;
    }
    rwn::Schema schema = d.schema();
    schema.push_back({"bmi", rwn::ColumnKind::kNumeric, {}});
    std::vector<rwn::Cell> cells;
    for (std::size_t i = 0; i < d.rows(); ++i) {
      for (const auto& c : d.row(i)) cells.push_back(c);
      const auto& cw = d.at(i, *w);
      const auto& ch = d.at(i, *h);
      cells.push_back(cw.is_missing() || ch.is_missing()
                          ? rwn::Cell::missing()
                          : rwn::Cell::number(703.0 * cw.number_value() /
                                              (ch.number_value() * ch.number_value())));
    }
    d = rwn::Dataset::create(std::move(schema), std::move(cells));
  }
  for (const char* need : {"siri", "bmi", "neck", "chest", "abdomen", "hip"}) {
    if (!d.column_index(need)) {
      note = std::string("body fat CSV lacks column ") + need;
      return std::nullopt;
    }
  }
  note = std::to_string(d.rows()) + " records";
  return d;
}

struct BodyfatRuns {
  std::vector<rwn::CorrelationReport> corr;
  std::vector<rwn::RegressionReport> regress;
};

constexpr double kBodyfatEps = 0.25;  // smallest radius of the sweep {1, 0.5, 0.25}
constexpr int kBodyfatSeeds = 25;

BodyfatRuns bodyfat_runs(const rwn::Dataset& d) {
  BodyfatRuns out;
  for (int s = 0; s < kBodyfatSeeds; ++s) {
    rwn::RwnConfig cfg;
    cfg.eps = kBodyfatEps;
    cfg.k = 5;
    cfg.q = 1.0;
    cfg.seed = 7000 + static_cast<std::uint64_t>(s);
    const rwn::Dataset w = rwn::run_rwn(d, cfg).output.released;
    out.corr.push_back(rwn::correlation_report(d, w));
    out.regress.push_back(rwn::regression_report(
        d, w, "siri", {"bmi", "neck", "chest", "abdomen", "hip"}));
  }
  return out;
}

Outcome correlation_preservation(const std::optional<BodyfatRuns>& runs,
                                 const std::string& note) {
  constexpr double kMinSameSign = 0.95;
  constexpr double kMaxMeanAbsDelta = 0.10;
  if (!runs) return {false, "not evaluated: " + note};
  std::size_t pairs = 0, flips = 0;
  double delta = 0.0;
  for (const auto& c : runs->corr) {
    pairs += c.compared_pairs;
    flips += c.sign_flips;
    delta += c.mean_abs_delta;
  }
  const double same = 1.0 - static_cast<double>(flips) / static_cast<double>(pairs);
  delta /= static_cast<double>(runs->corr.size());
  return {same >= kMinSameSign && delta <= kMaxMeanAbsDelta,
          note + fmt("; same sign %.4f", same) + fmt(", mean |delta| %.4f", delta)};
}

Outcome regression_stability(const std::optional<BodyfatRuns>& runs,
                             const std::string& note) {
  constexpr double kFactor = 2.0;
  constexpr double kMinFraction = 0.90;
  if (!runs) return {false, "not evaluated: " + note};
  std::size_t within = 0, total = 0, flips = 0;
  for (const auto& r : runs->regress) {
    const auto ratios = r.se_ratios();
    for (std::size_t c = 1; c < ratios.size(); ++c) {
      ++total;
      within += ratios[c] <= kFactor && ratios[c] >= 1.0 / kFactor;
    }
    flips += r.sign_flips();
  }
  const double frac = static_cast<double>(within) / static_cast<double>(total);
  return {frac >= kMinFraction,
          note + fmt("; SE within x2 in %.4f of pairs", frac) +
              "; coefficient sign flips " + std::to_string(flips) + " (reported only)"};
}

// ---------------------------------------------------------------------------
// 7. A gross outlier is hidden.

rwn::Dataset outlier_dataset(std::uint64_t seed) {
  constexpr std::size_t kRows = 241;
  constexpr std::size_t kPredictors = 5;
  rwn::CounterStream s(seed, rwn::Domain::kSynthetic, 0x0u);
  rwn::Schema schema;
  for (std::size_t j = 0; j < kPredictors; ++j) {
    schema.push_back({"x" + std::to_string(j), rwn::ColumnKind::kNumeric, {}});
  }
  schema.push_back({"y", rwn::ColumnKind::kNumeric, {}});
  std::vector<rwn::Cell> cells;
  for (std::size_t i = 0; i < kRows; ++i) {
    const double common = s.normal();
    double y = 1.0;
    std::vector<double> x(kPredictors);
    for (std::size_t j = 0; j < kPredictors; ++j) {
      x[j] = 0.7 * common + 0.7 * s.normal();
      y += 0.5 * x[j];
    }
    y += 0.5 * s.normal();
    if (i == 0) {  // far in predictor space and off the regression plane
      x[0] += 8.0;
      x[1] -= 6.0;
      y -= 10.0;
    }
    for (double v : x) cells.push_back(rwn::Cell::number(v));
    cells.push_back(rwn::Cell::number(y));
  }
  return rwn::Dataset::create(std::move(schema), std::move(cells));
}

Outcome outlier_protection() {
  constexpr int kSeeds = 25;
  constexpr int kMinWins = 20;
  int cook_wins = 0, maha_wins = 0;
  for (int s = 0; s < kSeeds; ++s) {
    const auto seed = 900 + static_cast<std::uint64_t>(s);
    const rwn::Dataset d = outlier_dataset(seed);
    rwn::RwnConfig cfg;
    cfg.eps = 0.1;
    cfg.k = 5;
    cfg.q = 1.0;
    cfg.seed = seed;
    const rwn::Dataset w = rwn::run_rwn(d, cfg).output.released;
    const auto reg = rwn::regression_report(d, w, "y", {"x0", "x1", "x2", "x3", "x4"});
    cook_wins += reg.perturbed.max_cooks() < reg.original.max_cooks();
    const auto cols = rwn::numeric_columns(d);
    maha_wins += rwn::mahalanobis(w, cols).max() < rwn::mahalanobis(d, cols).max();
  }
  return {cook_wins >= kMinWins && maha_wins >= kMinWins,
          "max Cook's lower in " + std::to_string(cook_wins) + "/25, max Mahalanobis lower in " +
              std::to_string(maha_wins) + "/25"};
}

// ---------------------------------------------------------------------------
// 8. Misclassification barely moves on Pima.

Outcome prediction_delta() {
  constexpr double kMaxDelta = 0.05;
  const rwn::Dataset d = rwn::load_csv(std::string(RWN_DATA_DIR) + "/pima.csv");
  rwn::ClassificationConfig cfg;
  cfg.label = "diabetes";
  cfg.holdout = 200;
  cfg.replications = 25;
  cfg.seed = 31;
  for (std::uint32_t k : {5u, 10u, 25u, 50u}) {
    rwn::RwnConfig g;
    g.eps = 0.0;
    g.k = k;
    g.q = 0.5;
    g.seed = 1000 + k;
    cfg.grid.push_back(g);
  }
  const auto res = rwn::classification_study(d, cfg, rwn::knn_classifier(),
                                             rwn::default_workers());
  bool ok = true;
  std::string detail = fmt("no release %.3f", res.baseline);
  for (const auto& row : res.rows) {
    ok = ok && std::abs(row.mean_rate - res.baseline) <= kMaxDelta;
    detail += "; k=" + std::to_string(row.config.k) + fmt(" %.3f", row.mean_rate);
  }
  detail += "; redrawn splits " + std::to_string(res.redraws);
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// 9. Cost counters.

Outcome complexity_counters() {
  constexpr double kPartitionRelTol = 0.01;
  constexpr double kMaxSeconds = 60.0;
  const auto start = Clock::now();
  rwn::BenchConfig cfg;
  cfg.sizes = {1000, 2000, 4000};
  cfg.m = 100;
  cfg.u = 4;
  cfg.seed = 3;
  const auto rows = rwn::run_bench(cfg, rwn::default_workers());
  bool ok = true;
  std::string detail;
  for (const auto& r : rows) {
    const std::uint64_t n = r.n;
    bool good = false;
    switch (r.backend) {
      case rwn::Backend::kExact:
        good = r.evaluations == n * (n - 1) / 2;
        break;
      case rwn::Backend::kPool:
        good = r.evaluations <= cfg.m * n;
        break;
      case rwn::Backend::kPairSample:
        good = r.evaluations == (n * cfg.m + 1) / 2;
        break;
      case rwn::Backend::kPartitioned: {
        const double target = static_cast<double>(n) * static_cast<double>(n) / (2.0 * cfg.u);
        good = std::abs(static_cast<double>(r.evaluations) - target) <= kPartitionRelTol * target;
        break;
      }
    }
    ok = ok && good;
    if (!good) {
      detail += "bad count n=" + std::to_string(n) + " " + rwn::to_string(r.backend) + "; ";
    }
  }
  const double took = seconds_since(start);
  const auto at = [&](std::size_t n, rwn::Backend b) {
    for (const auto& r : rows) {
      if (r.n == n && r.backend == b) return static_cast<double>(r.evaluations);
    }
    return 0.0;
  };
  detail += fmt("doubling ratios exact %.2f", at(4000, rwn::Backend::kExact) / at(2000, rwn::Backend::kExact)) +
            fmt(", pool %.2f", at(4000, rwn::Backend::kPool) / at(2000, rwn::Backend::kPool)) +
            fmt(", pair-sample %.2f", at(4000, rwn::Backend::kPairSample) / at(2000, rwn::Backend::kPairSample)) +
            fmt(", partitioned %.2f", at(4000, rwn::Backend::kPartitioned) / at(2000, rwn::Backend::kPartitioned)) +
            fmt("; %.1f s", took);
  return {ok && took < kMaxSeconds, detail};
}

// ---------------------------------------------------------------------------
// 10. Worker count never changes the bytes.

Outcome determinism() {
  const rwn::Dataset d = rwn::testing::random_dataset(
      77, {.rows = 600, .numeric = 4, .categorical = 2, .missing_rate = 0.03});
  int mismatches = 0;
  for (rwn::Backend b : {rwn::Backend::kExact, rwn::Backend::kPool,
                         rwn::Backend::kPairSample, rwn::Backend::kPartitioned}) {
    rwn::RwnConfig cfg;
    cfg.eps = 0.4;
    cfg.k = 3;
    cfg.q = 0.8;
    cfg.seed = 424242;
    cfg.backend = b;
    cfg.m = 20;
    cfg.u = 3;
    cfg.inner = rwn::Backend::kPool;
    std::string reference;
    for (unsigned workers : {1u, 2u, 8u}) {
      const rwn::RwnRun run = rwn::run_rwn(d, cfg, workers);
      std::string bytes = rwn::to_csv(run.output.released);
      for (const auto& m : run.neighborhoods.members) {
        for (auto x : m) bytes += std::to_string(x) + ' ';
        bytes += '\n';
      }
      if (workers == 1) {
        reference = bytes;
      } else if (bytes != reference) {
        ++mismatches;
      }
    }
  }

  // Same check through the command line: record a manifest with one worker,
  // replay it with two and eight.
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "rwn_acceptance_determinism";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string in = (dir / "w.csv").string();
  rwn::write_csv(d, in);
  int cli_mismatches = 0, cli_errors = 0;
  for (const char* backend : {"exact", "pool", "pair-sample", "partitioned"}) {
    const std::string stem = (dir / backend).string();
    const auto cli = [&](const std::string& args) {
      const std::string cmd = "'" + std::string(RWN_CLI_PATH) + "' perturb " + args + " 2> /dev/null";
      return std::system(cmd.c_str()) == 0;
    };
    if (!cli("--in '" + in + "' --eps 0.4 --k 3 --q 0.8 --seed 424242 --m 20 --u 3"
             " --inner pool --backend " + backend + " --workers 1 --out '" + stem + "-1.csv'")) {
      ++cli_errors;
      continue;
    }
    const std::string reference = rwn::read_file(stem + "-1.csv");
    for (const char* workers : {"2", "8"}) {
      const std::string out = stem + "-" + workers + ".csv";
      if (!cli("--config '" + stem + "-1.manifest.json' --workers " + workers + " --out '" +
               out + "' --manifest '" + out + ".json'")) {
        ++cli_errors;
      } else if (rwn::read_file(out) != reference) {
        ++cli_mismatches;
      }
    }
  }
  std::filesystem::remove_all(dir);
  return {mismatches == 0 && cli_mismatches == 0 && cli_errors == 0,
          "4 backends x workers {1,2,8}: " + std::to_string(mismatches) +
              " library mismatches, " + std::to_string(cli_mismatches) +
              " manifest replay mismatches, " + std::to_string(cli_errors) + " cli errors"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  std::string bodyfat_note;
  std::optional<BodyfatRuns> bodyfat;
  bool bodyfat_loaded = false;
  auto ensure_bodyfat = [&] {
    if (bodyfat_loaded) return;
    bodyfat_loaded = true;
    if (auto d = load_bodyfat(bodyfat_note)) bodyfat = bodyfat_runs(*d);
  };

  const std::vector<Criterion> criteria = {
      {1, "triangular decoder bijection", triangular_bijection},
      {2, "q=0 identity", zero_probability_identity},
      {3, "value provenance", provenance},
      {4, "joint distribution as eps shrinks", theorem_reproduction},
      {5, "correlation preservation (body fat)",
       [&] { ensure_bodyfat(); return correlation_preservation(bodyfat, bodyfat_note); }},
      {6, "regression standard-error stability (body fat)",
       [&] { ensure_bodyfat(); return regression_stability(bodyfat, bodyfat_note); }},
      {7, "outlier protection", outlier_protection},
      {8, "prediction delta (Pima)", prediction_delta},
      {9, "complexity counters", complexity_counters},
      {10, "determinism under parallelism", determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
