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

// rwn: release, evaluate, diagnose and benchmark from the command line.
//
// Exit codes: 0 ok, 1 I/O failure, 2 invalid configuration or usage,
// 3 invalid data.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rwn/bench.hpp"
#include "rwn/dataset.hpp"
#include "rwn/distance.hpp"
#include "rwn/engine.hpp"
#include "rwn/error.hpp"
#include "rwn/io.hpp"
#include "rwn/metrics.hpp"
#include "rwn/neighborhoods.hpp"
#include "rwn/parallel.hpp"
#include "rwn/standardize.hpp"
#include "rwn/version.hpp"

namespace {

using nlohmann::json;
using rwn::ConfigError;

constexpr int kExitIo = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

// Config file contents layered under the command line: a value is taken
// from the file only when its flag was not given. Keys are the long flag
// names without dashes. A run manifest works as a config file; its
// "config" object is merged over the top level and bookkeeping keys are
// ignored.
class Layered {
 public:
  Layered(CLI::App& app, std::set<std::string> keys)
      : app_(app), keys_(std::move(keys)) {}

  void load(const std::string& path) {
    if (path.empty()) return;
    json doc;
    try {
      doc = json::parse(rwn::read_file(path));
    } catch (const json::exception& e) {
      throw ConfigError("config", path + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config", "must be a JSON object");
    const bool manifest = doc.contains("config");
    if (manifest) {
      if (!doc["config"].is_object()) {
        throw ConfigError("config", "\"config\" must be an object");
      }
      for (const auto& [k, v] : doc["config"].items()) doc[k] = v;
    }
    for (const auto& [k, v] : doc.items()) {
      if (keys_.count(k)) {
        values_[k] = v;
      } else if (!manifest) {
        throw ConfigError(k, "unknown key in config file");
      }
    }
  }

  template <typename T>
  void fill(const std::string& key, std::optional<T>& target) {
    if (target || !values_.count(key) || values_[key].is_null() ||
        app_.count("--" + key) > 0) {
      return;
    }
    try {
      target = values_[key].get<T>();
    } catch (const json::exception&) {
      throw ConfigError(key, "config file value has the wrong type");
    }
  }

 private:
  CLI::App& app_;
  std::set<std::string> keys_;
  std::map<std::string, json> values_;
};

struct ReleaseFlags {
  std::optional<double> eps;
  std::optional<std::uint32_t> k;
  std::optional<double> q;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  std::optional<std::string> inner;
  std::optional<std::uint64_t> m;
  std::optional<std::uint32_t> u;
  std::optional<bool> fresh_pool;
  std::optional<std::vector<double>> weights;
};

void add_release_flags(CLI::App& app, ReleaseFlags& f, bool with_eps) {
  if (with_eps) app.add_option("--eps", f.eps, "neighborhood radius (standardized units)");
  app.add_option("--k", f.k, "nearest-neighbor floor");
  app.add_option("--q", f.q, "per-cell modification probability");
  app.add_option("--seed", f.seed, "master seed (fallback: RWN_SEED)");
  app.add_option("--backend", f.backend, "exact | pool | pair-sample | partitioned");
  app.add_option("--inner", f.inner, "backend used inside each partition");
  app.add_option("--m", f.m, "pool size / average sampled degree");
  app.add_option("--u", f.u, "number of partitions");
  app.add_flag("--fresh-pool", f.fresh_pool, "draw a fresh pool for every record");
  app.add_option("--weights", f.weights, "per-column distance weights")->delimiter(',');
}

void fill_release_flags(Layered& cfg, ReleaseFlags& f) {
  cfg.fill("eps", f.eps);
  cfg.fill("k", f.k);
  cfg.fill("q", f.q);
  cfg.fill("seed", f.seed);
  cfg.fill("backend", f.backend);
  cfg.fill("inner", f.inner);
  cfg.fill("m", f.m);
  cfg.fill("u", f.u);
  cfg.fill("fresh-pool", f.fresh_pool);
  cfg.fill("weights", f.weights);
}

const std::set<std::string> kReleaseKeys = {"eps", "k", "q", "seed", "backend",
                                            "inner", "m", "u", "fresh-pool",
                                            "weights"};

rwn::Backend backend_flag(const std::string& field, const std::string& name) {
  const auto b = rwn::parse_backend(name);
  if (!b) throw ConfigError(field, "unknown backend '" + name + "'");
  return *b;
}

std::uint64_t seed_fallback() {
  const char* env = std::getenv("RWN_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used, 10);
    if (env[used] != '\0') throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("seed", "RWN_SEED is not an unsigned integer");
  }
}

rwn::RwnConfig release_config(const ReleaseFlags& f) {
  rwn::RwnConfig c;
  c.eps = f.eps.value_or(0.0);
  c.k = f.k.value_or(0);
  c.q = f.q.value_or(1.0);
  c.seed = f.seed ? *f.seed : seed_fallback();
  c.backend = backend_flag("backend", f.backend.value_or("exact"));
  c.inner = backend_flag("inner", f.inner.value_or("exact"));
  c.m = f.m.value_or(0);
  c.u = f.u.value_or(1);
  c.fresh_pool_per_point = f.fresh_pool.value_or(false);
  c.weights = f.weights.value_or(std::vector<double>{});
  c.validate();
  return c;
}

json config_json(const rwn::RwnConfig& c) {
  return {{"eps", c.eps},
          {"k", c.k},
          {"q", c.q},
          {"seed", c.seed},
          {"backend", rwn::to_string(c.backend)},
          {"inner", rwn::to_string(c.inner)},
          {"m", c.m},
          {"u", c.u},
          {"fresh-pool", c.fresh_pool_per_point},
          {"weights", c.weights}};
}

std::optional<rwn::Schema> maybe_schema(const std::optional<std::string>& path) {
  if (!path || path->empty()) return std::nullopt;
  return rwn::load_schema(*path);
}

void require(const std::optional<std::string>& v, const std::string& flag) {
  if (!v || v->empty()) throw ConfigError(flag, "--" + flag + " is required");
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct Common {
  std::optional<std::string> config;
  std::optional<unsigned> workers;
  std::optional<std::string> missing_token;
};

void add_common(CLI::App& app, Common& c) {
  app.add_option("--config", c.config, "JSON config file (or a run manifest)");
  app.add_option("--workers", c.workers, "worker threads (default: all cores)");
  app.add_option("--missing-token", c.missing_token, "missing-value token (default NA)");
}

unsigned workers_of(const Common& c) {
  const unsigned w = c.workers.value_or(rwn::default_workers());
  if (w == 0) throw ConfigError("workers", "must be >= 1");
  return w;
}

// ---------------------------------------------------------------------------

struct PerturbCmd {
  Common common;
  ReleaseFlags release;
  std::optional<std::string> in, schema, out, manifest;
};

int run_perturb(CLI::App& app, PerturbCmd& cmd) {
  std::set<std::string> keys = kReleaseKeys;
  keys.insert({"in", "schema", "out", "manifest", "workers", "missing-token"});
  Layered cfg(app, keys);
  cfg.load(cmd.common.config.value_or(""));
  fill_release_flags(cfg, cmd.release);
  cfg.fill("in", cmd.in);
  cfg.fill("schema", cmd.schema);
  cfg.fill("out", cmd.out);
  cfg.fill("manifest", cmd.manifest);
  cfg.fill("workers", cmd.common.workers);
  cfg.fill("missing-token", cmd.common.missing_token);

  // Everything that can be checked without the data is checked first.
  const rwn::RwnConfig rc = release_config(cmd.release);
  require(cmd.in, "in");
  require(cmd.out, "out");
  const unsigned workers = workers_of(cmd.common);
  const std::string token = cmd.common.missing_token.value_or("NA");
  const std::string manifest_path =
      cmd.manifest.value_or(std::filesystem::path(*cmd.out)
                                .replace_extension(".manifest.json")
                                .string());

  const auto start = std::chrono::steady_clock::now();
  const std::string input_text = rwn::read_file(*cmd.in);
  const rwn::Dataset d = rwn::parse_csv(input_text, maybe_schema(cmd.schema), token);
  const rwn::RwnRun run = rwn::run_rwn(d, rc, workers);
  const std::string output_text = rwn::to_csv(run.output.released, token);
  rwn::write_file(*cmd.out, output_text);
  const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;

  json manifest = {
      {"tool", "rwn"},
      {"version", rwn::kVersion},
      {"command", "perturb"},
      {"config", config_json(rc)},
      {"in", *cmd.in},
      {"schema", cmd.schema ? json(*cmd.schema) : json(nullptr)},
      {"out", *cmd.out},
      {"missing-token", token},
      {"input_fingerprint", "fnv1a64:" + rwn::hex64(rwn::fnv1a64(input_text))},
      {"output_fingerprint", "fnv1a64:" + rwn::hex64(rwn::fnv1a64(output_text))},
      {"rows", d.rows()},
      {"columns", d.cols()},
      {"workers", workers},
      {"started_utc", utc_now()},
      {"wall_seconds", took.count()},
      {"distance_evaluations", run.neighborhoods.distance_evaluations},
      {"partition_evaluations", run.neighborhoods.partition_evaluations},
      {"modified_cell_count", run.output.modified_count()},
      {"nullified_records", run.output.nullified_records()}};
  rwn::write_file(manifest_path, manifest.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateCmd {
  Common common;
  std::optional<std::string> original, perturbed, schema, out, tables_dir, regress;
};

int run_evaluate(CLI::App& app, EvaluateCmd& cmd) {
  Layered cfg(app, {"original", "perturbed", "schema", "out", "tables-dir",
                    "regress", "workers", "missing-token"});
  cfg.load(cmd.common.config.value_or(""));
  cfg.fill("original", cmd.original);
  cfg.fill("perturbed", cmd.perturbed);
  cfg.fill("schema", cmd.schema);
  cfg.fill("out", cmd.out);
  cfg.fill("tables-dir", cmd.tables_dir);
  cfg.fill("regress", cmd.regress);
  cfg.fill("workers", cmd.common.workers);
  cfg.fill("missing-token", cmd.common.missing_token);

  require(cmd.original, "original");
  require(cmd.perturbed, "perturbed");
  std::optional<rwn::RegressionSpec> regress;
  if (cmd.regress) regress = rwn::parse_regression_spec(*cmd.regress);
  const unsigned workers = workers_of(cmd.common);
  const std::string token = cmd.common.missing_token.value_or("NA");

  const rwn::Dataset orig = rwn::load_csv(*cmd.original, maybe_schema(cmd.schema), token);
  const rwn::Dataset pert = rwn::load_csv(*cmd.perturbed, orig.schema(), token);
  const rwn::EvaluationReport report = rwn::evaluate(orig, pert, regress, workers);
  json j = rwn::report_to_json(report);
  j["tool"] = "rwn";
  j["version"] = rwn::kVersion;
  j["original"] = *cmd.original;
  j["perturbed"] = *cmd.perturbed;
  const std::string text = j.dump(2) + "\n";
  if (cmd.out) {
    rwn::write_file(*cmd.out, text);
  } else {
    std::cout << text;
  }
  if (cmd.tables_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*cmd.tables_dir, ec);
    if (ec) throw rwn::IoError("cannot create " + *cmd.tables_dir + ": " + ec.message());
    for (const auto& [name, table] : rwn::report_tables(report)) {
      rwn::write_file((std::filesystem::path(*cmd.tables_dir) / name).string(), table);
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct DiagnoseCmd {
  Common common;
  ReleaseFlags release;
  std::optional<std::vector<double>> eps_list;
  std::optional<std::string> in, schema, out;
};

std::string table_path(const std::string& out, double eps, bool several) {
  if (!several) return out;
  std::filesystem::path p(out);
  const std::string ext = p.has_extension() ? p.extension().string() : ".csv";
  p.replace_extension();
  return p.string() + ".eps-" + rwn::format_number(eps) + ext;
}

int run_diagnose(CLI::App& app, DiagnoseCmd& cmd) {
  std::set<std::string> keys = kReleaseKeys;
  keys.insert({"in", "schema", "out", "workers", "missing-token"});
  Layered cfg(app, keys);
  cfg.load(cmd.common.config.value_or(""));
  fill_release_flags(cfg, cmd.release);
  if (!cmd.eps_list && app.count("--eps") == 0) {
    std::optional<json> eps;
    cfg.fill("eps", eps);
    if (eps) {
      try {
        cmd.eps_list = eps->is_array() ? eps->get<std::vector<double>>()
                                       : std::vector<double>{eps->get<double>()};
      } catch (const json::exception&) {
        throw ConfigError("eps", "config file value has the wrong type");
      }
    }
  }
  cfg.fill("in", cmd.in);
  cfg.fill("schema", cmd.schema);
  cfg.fill("out", cmd.out);
  cfg.fill("workers", cmd.common.workers);
  cfg.fill("missing-token", cmd.common.missing_token);

  const std::vector<double> radii = cmd.eps_list.value_or(std::vector<double>{0.0});
  std::vector<rwn::RwnConfig> configs;
  for (double e : radii) {
    ReleaseFlags f = cmd.release;
    f.eps = e;
    configs.push_back(release_config(f));
  }
  require(cmd.in, "in");
  require(cmd.out, "out");
  const unsigned workers = workers_of(cmd.common);
  const std::string token = cmd.common.missing_token.value_or("NA");

  const rwn::Dataset d = rwn::load_csv(*cmd.in, maybe_schema(cmd.schema), token);
  if (d.rows() < 2) {
    throw rwn::DataError("diagnose needs at least 2 records, found " +
                         std::to_string(d.rows()));
  }
  const rwn::StandardizedView view = rwn::standardize(d);
  for (const auto& rc : configs) {
    const rwn::DistanceSpec spec(view, rc.weights);
    const auto ns = rwn::build_neighborhoods(spec, rc.neighborhood_params(), workers);
    const auto rows = rwn::min_distance_profile(spec, ns, workers);
    rwn::write_file(table_path(*cmd.out, rc.eps, configs.size() > 1),
                    rwn::profile_to_csv(rows));
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchCmd {
  Common common;
  std::optional<std::vector<std::size_t>> sizes;
  std::optional<std::vector<std::string>> backends;
  std::optional<std::size_t> columns;
  ReleaseFlags release;
  std::optional<std::string> out;
};

int run_bench_cmd(CLI::App& app, BenchCmd& cmd) {
  Layered cfg(app, {"sizes", "backends", "columns", "eps", "k", "m", "u",
                    "inner", "seed", "out", "workers"});
  cfg.load(cmd.common.config.value_or(""));
  cfg.fill("sizes", cmd.sizes);
  cfg.fill("backends", cmd.backends);
  cfg.fill("columns", cmd.columns);
  cfg.fill("eps", cmd.release.eps);
  cfg.fill("k", cmd.release.k);
  cfg.fill("m", cmd.release.m);
  cfg.fill("u", cmd.release.u);
  cfg.fill("inner", cmd.release.inner);
  cfg.fill("seed", cmd.release.seed);
  cfg.fill("out", cmd.out);
  cfg.fill("workers", cmd.common.workers);

  rwn::BenchConfig bc;
  if (cmd.sizes) bc.sizes = *cmd.sizes;
  if (cmd.backends) {
    bc.backends.clear();
    for (const auto& name : *cmd.backends) bc.backends.push_back(backend_flag("backends", name));
  }
  bc.columns = cmd.columns.value_or(bc.columns);
  bc.eps = cmd.release.eps.value_or(bc.eps);
  bc.k = cmd.release.k.value_or(bc.k);
  bc.m = cmd.release.m.value_or(bc.m);
  bc.u = cmd.release.u.value_or(bc.u);
  bc.inner = backend_flag("inner", cmd.release.inner.value_or("exact"));
  bc.seed = cmd.release.seed ? *cmd.release.seed : seed_fallback();
  if (bc.columns == 0) throw ConfigError("columns", "must be >= 1");
  for (std::size_t n : bc.sizes) {
    if (n < 2) throw ConfigError("sizes", "every size must be >= 2");
  }
  const unsigned workers = workers_of(cmd.common);

  const std::string table = rwn::bench_to_csv(rwn::run_bench(bc, workers));
  if (cmd.out) {
    rwn::write_file(*cmd.out, table);
  } else {
    std::cout << table;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomization within neighborhoods for microdata release"};
  app.set_version_flag("--version", rwn::kVersion);
  app.require_subcommand(1);

  PerturbCmd perturb;
  auto* p = app.add_subcommand("perturb", "release a perturbed copy of a CSV file");
  add_common(*p, perturb.common);
  add_release_flags(*p, perturb.release, true);
  p->add_option("--in", perturb.in, "input CSV");
  p->add_option("--schema", perturb.schema, "schema JSON (default: inferred)");
  p->add_option("--out", perturb.out, "output CSV");
  p->add_option("--manifest", perturb.manifest, "manifest path (default: <out>.manifest.json)");

  EvaluateCmd evaluate;
  auto* e = app.add_subcommand("evaluate", "compare an original and a released file");
  add_common(*e, evaluate.common);
  e->add_option("--original", evaluate.original, "original CSV");
  e->add_option("--perturbed", evaluate.perturbed, "released CSV");
  e->add_option("--schema", evaluate.schema, "schema JSON (default: inferred from original)");
  e->add_option("--out", evaluate.out, "report JSON (default: stdout)");
  e->add_option("--tables-dir", evaluate.tables_dir, "directory for CSV tables");
  e->add_option("--regress", evaluate.regress, "regression, e.g. y~a,b,c");

  DiagnoseCmd diagnose;
  auto* g = app.add_subcommand("diagnose", "minimum distance vs neighborhood size");
  add_common(*g, diagnose.common);
  add_release_flags(*g, diagnose.release, false);
  g->add_option("--eps", diagnose.eps_list, "one or more radii")->delimiter(',');
  g->add_option("--in", diagnose.in, "input CSV");
  g->add_option("--schema", diagnose.schema, "schema JSON (default: inferred)");
  g->add_option("--out", diagnose.out, "output CSV (one file per radius when several)");

  BenchCmd bench;
  auto* b = app.add_subcommand("bench", "distance evaluations and time per backend");
  add_common(*b, bench.common);
  b->add_option("--sizes", bench.sizes, "record counts")->delimiter(',');
  b->add_option("--backends", bench.backends, "backends to run")->delimiter(',');
  b->add_option("--columns", bench.columns, "synthetic columns (default 4)");
  b->add_option("--eps", bench.release.eps, "radius");
  b->add_option("--k", bench.release.k, "nearest-neighbor floor");
  b->add_option("--m", bench.release.m, "pool size / sampled degree (default 100)");
  b->add_option("--u", bench.release.u, "partitions (default 4)");
  b->add_option("--inner", bench.release.inner, "backend inside partitions");
  b->add_option("--seed", bench.release.seed, "seed");
  b->add_option("--out", bench.out, "output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*p) return run_perturb(*p, perturb);
    if (*e) return run_evaluate(*e, evaluate);
    if (*g) return run_diagnose(*g, diagnose);
    if (*b) return run_bench_cmd(*b, bench);
  } catch (const rwn::ConfigError& err) {
    std::cerr << "rwn: invalid configuration: " << err.what() << "\n";
    return kExitConfig;
  } catch (const rwn::IoError& err) {
    std::cerr << "rwn: " << err.what() << "\n";
    return kExitIo;
  } catch (const rwn::DataError& err) {
    std::cerr << "rwn: invalid data: " << err.what() << "\n";
    return kExitData;
  } catch (const rwn::NumericError& err) {
    std::cerr << "rwn: numeric failure: " << err.what() << "\n";
    return kExitData;
  } catch (const std::bad_alloc&) {
    std::cerr << "rwn: out of memory\n";
    return kExitIo;
  }
  return kExitConfig;
}
