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

// Utility and privacy measures comparing an original dataset with its
// released version: correlations, least-squares regression with Cook's
// distances, Mahalanobis and nearest-record distances, and PCA.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rwn/dataset.hpp"
#include "rwn/distance.hpp"
#include "rwn/error.hpp"
#include "rwn/io.hpp"
#include "rwn/linalg.hpp"
#include "rwn/parallel.hpp"
#include "rwn/standardize.hpp"

namespace rwn {

inline void require_paired(const Dataset& orig, const Dataset& pert) {
  if (orig.schema() != pert.schema()) {
    throw DataError("original and perturbed datasets have different schemas");
  }
  if (orig.rows() != pert.rows()) {
    throw DataError("original has " + std::to_string(orig.rows()) +
                    " records, perturbed has " + std::to_string(pert.rows()));
  }
}

inline std::vector<std::size_t> numeric_columns(const Dataset& d) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < d.cols(); ++j) {
    if (d.column(j).kind == ColumnKind::kNumeric) out.push_back(j);
  }
  return out;
}

// Rows whose listed columns are all present.
inline std::vector<std::size_t> complete_rows(
    const Dataset& d, const std::vector<std::size_t>& cols) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    bool ok = true;
    for (std::size_t j : cols) ok = ok && !d.at(i, j).is_missing();
    if (ok) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Correlations

// Pearson correlation over the rows where both columns are present;
// nullopt with fewer than 2 such rows or zero variance on either side.
inline std::optional<double> pairwise_pearson(const Dataset& d, std::size_t a,
                                              std::size_t b) {
  double n = 0, ma = 0, mb = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (d.at(i, a).is_missing() || d.at(i, b).is_missing()) continue;
    n += 1;
    ma += d.at(i, a).number_value();
    mb += d.at(i, b).number_value();
  }
  if (n < 2) return std::nullopt;
  ma /= n;
  mb /= n;
  double saa = 0, sbb = 0, sab = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (d.at(i, a).is_missing() || d.at(i, b).is_missing()) continue;
    const double da = d.at(i, a).number_value() - ma;
    const double db = d.at(i, b).number_value() - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

struct CorrelationReport {
  std::vector<std::string> columns;
  // p*p row-major; nullopt entries are undefined.
  std::vector<std::optional<double>> original;
  std::vector<std::optional<double>> perturbed;
  std::vector<std::optional<double>> delta;  // perturbed - original
  std::size_t compared_pairs = 0;  // off-diagonal a < b defined on both sides
  std::size_t sign_flips = 0;
  double mean_abs_delta = 0.0;
  double max_abs_delta = 0.0;

  std::size_t dim() const { return columns.size(); }
  double same_sign_fraction() const {
    return compared_pairs == 0
               ? 1.0
               : 1.0 - static_cast<double>(sign_flips) /
                           static_cast<double>(compared_pairs);
  }
};

inline std::vector<std::optional<double>> correlation_matrix(
    const Dataset& d, const std::vector<std::size_t>& cols) {
  const std::size_t p = cols.size();
  std::vector<std::optional<double>> m(p * p);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a; b < p; ++b) {
      auto r = pairwise_pearson(d, cols[a], cols[b]);
      if (a == b && r) r = 1.0;
      m[a * p + b] = m[b * p + a] = r;
    }
  }
  return m;
}

inline CorrelationReport correlation_report(const Dataset& orig,
                                            const Dataset& pert) {
  require_paired(orig, pert);
  const auto cols = numeric_columns(orig);
  CorrelationReport r;
  for (std::size_t j : cols) r.columns.push_back(orig.column(j).name);
  r.original = correlation_matrix(orig, cols);
  r.perturbed = correlation_matrix(pert, cols);
  const std::size_t p = cols.size();
  r.delta.resize(p * p);
  double sum = 0.0;
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) {
      const auto& x = r.original[a * p + b];
      const auto& y = r.perturbed[a * p + b];
      if (!x || !y) continue;
      r.delta[a * p + b] = *y - *x;
      if (a < b) {
        ++r.compared_pairs;
        if ((*x > 0) != (*y > 0) || (*x < 0) != (*y < 0)) ++r.sign_flips;
        sum += std::abs(*y - *x);
        r.max_abs_delta = std::max(r.max_abs_delta, std::abs(*y - *x));
      }
    }
  }
  if (r.compared_pairs > 0) {
    r.mean_abs_delta = sum / static_cast<double>(r.compared_pairs);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Regression

struct RegressionFit {
  std::vector<std::size_t> rows;     // records used (complete cases)
  std::vector<double> coefficients;  // intercept first
  std::vector<double> std_errors;
  double residual_variance = 0.0;
  std::vector<double> cooks;     // aligned with `rows`
  std::vector<double> leverage;  // aligned with `rows`

  double max_cooks() const {
    double m = 0.0;
    for (double c : cooks) m = std::max(m, c);
    return m;
  }
};

// Ordinary least squares of `response` on `predictors` plus an intercept,
// over the complete rows.
inline RegressionFit fit_ols(const Dataset& d, std::size_t response,
                             const std::vector<std::size_t>& predictors) {
  for (std::size_t j : predictors) {
    if (d.column(j).kind != ColumnKind::kNumeric) {
      throw DataError("predictor '" + d.column(j).name + "' is not numeric");
    }
  }
  if (d.column(response).kind != ColumnKind::kNumeric) {
    throw DataError("response '" + d.column(response).name +
                    "' is not numeric");
  }
  std::vector<std::size_t> used = predictors;
  used.push_back(response);
  RegressionFit fit;
  fit.rows = complete_rows(d, used);
  const auto n = static_cast<Eigen::Index>(fit.rows.size());
  const auto k = static_cast<Eigen::Index>(predictors.size() + 1);
  if (n < k + 1) {
    throw DataError("regression needs at least " + std::to_string(k + 1) +
                    " complete rows, found " + std::to_string(n));
  }
  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t i = fit.rows[static_cast<std::size_t>(r)];
    x(r, 0) = 1.0;
    for (Eigen::Index c = 1; c < k; ++c) {
      x(r, c) = d.at(i, predictors[static_cast<std::size_t>(c - 1)]).number_value();
    }
    y(r) = d.at(i, response).number_value();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < k) throw DataError("regression design is rank-deficient");
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - x * beta;
  const double sse = resid.squaredNorm();
  const double s2 = sse / static_cast<double>(n - k);
  // (X'X)^-1 = P R^-1 R^-T P^T
  const Eigen::MatrixXd rr =
      qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd rinv =
      rr.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd xtx_inv_perm = rinv * rinv.transpose();
  const auto& perm = qr.colsPermutation();
  const Eigen::MatrixXd xtx_inv = perm * xtx_inv_perm * perm.transpose();

  fit.residual_variance = s2;
  for (Eigen::Index c = 0; c < k; ++c) {
    fit.coefficients.push_back(beta(c));
    fit.std_errors.push_back(std::sqrt(s2 * xtx_inv(c, c)));
  }
  fit.cooks.resize(static_cast<std::size_t>(n));
  fit.leverage.resize(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::RowVectorXd xr = x.row(r);
    const double h = (xr * xtx_inv * xr.transpose())(0, 0);
    fit.leverage[static_cast<std::size_t>(r)] = h;
    const double e = resid(r);
    double cook = 0.0;
    if (s2 > 0.0) {
      cook = h >= 1.0 ? std::numeric_limits<double>::infinity()
                      : e * e / (static_cast<double>(k) * s2) * h /
                            ((1.0 - h) * (1.0 - h));
    }
    fit.cooks[static_cast<std::size_t>(r)] = cook;
  }
  return fit;
}

struct RegressionReport {
  std::string response;
  std::vector<std::string> predictors;
  RegressionFit original;
  RegressionFit perturbed;

  // Ratios of perturbed to original standard errors, intercept first.
  std::vector<double> se_ratios() const {
    std::vector<double> out;
    for (std::size_t c = 0; c < original.std_errors.size(); ++c) {
      out.push_back(perturbed.std_errors[c] / original.std_errors[c]);
    }
    return out;
  }
  std::size_t sign_flips() const {
    std::size_t f = 0;
    for (std::size_t c = 1; c < original.coefficients.size(); ++c) {
      f += (original.coefficients[c] > 0) != (perturbed.coefficients[c] > 0);
    }
    return f;
  }
};

inline RegressionReport regression_report(
    const Dataset& orig, const Dataset& pert, const std::string& response,
    const std::vector<std::string>& predictors) {
  require_paired(orig, pert);
  if (predictors.empty()) throw ConfigError("regress", "no predictors given");
  std::vector<std::size_t> cols;
  for (const auto& name : predictors) cols.push_back(orig.require_column(name));
  const std::size_t y = orig.require_column(response);
  return {response, predictors, fit_ols(orig, y, cols), fit_ols(pert, y, cols)};
}

// ---------------------------------------------------------------------------
// Privacy

struct Summary {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  std::size_t count = 0;
};

inline Summary summarize(const std::vector<std::optional<double>>& xs) {
  std::vector<double> v;
  for (const auto& x : xs) {
    if (x && std::isfinite(*x)) v.push_back(*x);
  }
  Summary s;
  s.count = v.size();
  if (v.empty()) return s;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  s.q1 = quantile(v, 0.25);
  s.median = quantile(v, 0.5);
  s.q3 = quantile(v, 0.75);
  return s;
}

struct MahalanobisResult {
  std::vector<std::optional<double>> distances;  // nullopt: incomplete row
  bool pseudo_inverse = false;

  double max() const {
    double m = 0.0;
    for (const auto& d : distances) {
      if (d) m = std::max(m, *d);
    }
    return m;
  }
};

// Distances of each complete row from the mean of the complete rows, under
// their sample covariance. A singular covariance (or fewer than p+1 rows)
// falls back to the pseudo-inverse and sets the flag.
inline MahalanobisResult mahalanobis(const Dataset& d,
                                     const std::vector<std::size_t>& cols) {
  MahalanobisResult out;
  out.distances.resize(d.rows());
  const auto rows = complete_rows(d, cols);
  const auto p = static_cast<Eigen::Index>(cols.size());
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (p == 0 || n < 2) {
    out.pseudo_inverse = true;
    return out;
  }
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < p; ++c)
      x(r, c) = d.at(rows[static_cast<std::size_t>(r)],
                     cols[static_cast<std::size_t>(c)]).number_value();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cutoff = std::max(ev.cwiseAbs().maxCoeff(), 1e-300) *
                        static_cast<double>(p) *
                        std::numeric_limits<double>::epsilon() * 1e3;
  Eigen::VectorXd inv(p);
  for (Eigen::Index c = 0; c < p; ++c) {
    if (ev(c) > cutoff) {
      inv(c) = 1.0 / ev(c);
    } else {
      inv(c) = 0.0;
      out.pseudo_inverse = true;
    }
  }
  if (n < p + 1) out.pseudo_inverse = true;
  const Eigen::MatrixXd proj = x * es.eigenvectors();
  for (Eigen::Index r = 0; r < n; ++r) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < p; ++c) s += proj(r, c) * proj(r, c) * inv(c);
    out.distances[rows[static_cast<std::size_t>(r)]] = std::sqrt(s);
  }
  return out;
}

inline bool all_missing(const Dataset& d, std::size_t i) {
  for (const Cell& c : d.row(i)) {
    if (!c.is_missing()) return false;
  }
  return true;
}

// Distance from each record to its closest other record of the same
// dataset. Records with every cell missing are skipped on both sides.
inline std::vector<std::optional<double>> min_record_distances(
    const Dataset& d, const DistanceSpec& spec, unsigned workers = 1) {
  const std::size_t n = d.rows();
  std::vector<std::uint8_t> skip(n);
  for (std::size_t i = 0; i < n; ++i) skip[i] = all_missing(d, i);
  std::vector<std::optional<double>> out(n);
  parallel_for(n, workers, [&](std::size_t i) {
    if (skip[i]) return;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && !skip[j]) best = std::min(best, spec(i, j));
    }
    if (std::isfinite(best)) out[i] = best;
  });
  return out;
}

struct PrivacyReport {
  std::vector<std::string> numeric_columns;
  MahalanobisResult mahalanobis_original;
  MahalanobisResult mahalanobis_perturbed;
  std::vector<std::optional<double>> min_distance_original;
  std::vector<std::optional<double>> min_distance_perturbed;
  std::vector<std::optional<double>> distance_to_origin;
  double identical_row_fraction = 0.0;
};

// Both datasets are placed on the original's standardized scale so their
// nearest-record distances are comparable.
inline PrivacyReport privacy_report(const Dataset& orig, const Dataset& pert,
                                    unsigned workers = 1) {
  require_paired(orig, pert);
  PrivacyReport r;
  const auto cols = numeric_columns(orig);
  for (std::size_t j : cols) r.numeric_columns.push_back(orig.column(j).name);
  r.mahalanobis_original = mahalanobis(orig, cols);
  r.mahalanobis_perturbed = mahalanobis(pert, cols);

  const StandardizedView vo = standardize(orig);
  const StandardizedView vp = StandardizedView::with_reference(pert, vo);
  r.min_distance_original = min_record_distances(orig, DistanceSpec(vo), workers);
  r.min_distance_perturbed = min_record_distances(pert, DistanceSpec(vp), workers);

  const DistanceSpec cross(vp, vo);
  std::size_t identical = 0;
  r.distance_to_origin.resize(orig.rows());
  for (std::size_t i = 0; i < orig.rows(); ++i) {
    const auto a = orig.row(i);
    const auto b = pert.row(i);
    identical += std::equal(a.begin(), a.end(), b.begin(), b.end());
    if (!all_missing(pert, i)) r.distance_to_origin[i] = cross(i, i);
  }
  r.identical_row_fraction =
      static_cast<double>(identical) / static_cast<double>(orig.rows());
  return r;
}

// ---------------------------------------------------------------------------
// PCA

struct PcaResult {
  std::vector<std::string> columns;  // non-constant numeric columns used
  std::vector<double> std_devs;      // per component, decreasing
  std::vector<double> proportions;
  std::size_t rows_used = 0;
  int sweeps = 0;
  bool converged = true;
};

// Principal components of the correlation matrix of the complete rows.
// Columns that are constant over those rows carry no correlation and are
// left out.
inline PcaResult pca(const Dataset& d) {
  const auto numeric = numeric_columns(d);
  const auto rows = complete_rows(d, numeric);
  PcaResult out;
  out.rows_used = rows.size();
  if (rows.size() < 2) {
    throw DataError("PCA needs at least 2 complete rows, found " +
                    std::to_string(rows.size()));
  }
  std::vector<std::size_t> cols;
  for (std::size_t j : numeric) {
    const double first = d.at(rows.front(), j).number_value();
    for (std::size_t i : rows) {
      if (d.at(i, j).number_value() != first) {
        cols.push_back(j);
        break;
      }
    }
  }
  if (cols.empty()) return out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < p; ++c)
      x(r, c) = d.at(rows[static_cast<std::size_t>(r)],
                     cols[static_cast<std::size_t>(c)]).number_value();
  x.rowwise() -= x.colwise().mean();
  Eigen::MatrixXd cov = x.transpose() * x / static_cast<double>(n - 1);
  const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
  Eigen::MatrixXd corr = cov.array() / (sd * sd.transpose()).array();
  corr.diagonal().setOnes();
  const SymmetricEigen eig = jacobi_eigen(corr);
  out.sweeps = eig.sweeps;
  out.converged = eig.converged;
  double total = 0.0;
  for (double v : eig.values) total += std::max(v, 0.0);
  for (std::size_t j : cols) out.columns.push_back(d.column(j).name);
  for (double v : eig.values) {
    out.std_devs.push_back(std::sqrt(std::max(v, 0.0)));
    out.proportions.push_back(std::max(v, 0.0) / total);
  }
  return out;
}

struct PcaReport {
  PcaResult original;
  PcaResult perturbed;
};

inline PcaReport pca_report(const Dataset& orig, const Dataset& pert) {
  require_paired(orig, pert);
  return {pca(orig), pca(pert)};
}

// ---------------------------------------------------------------------------
// Combined report

struct EvaluationReport {
  CorrelationReport correlation;
  PrivacyReport privacy;
  PcaReport pca;
  std::optional<RegressionReport> regression;
};

struct RegressionSpec {
  std::string response;
  std::vector<std::string> predictors;
};

// Parses "y~a,b,c".
inline RegressionSpec parse_regression_spec(const std::string& text) {
  const auto tilde = text.find('~');
  if (tilde == std::string::npos || tilde == 0 || tilde + 1 == text.size()) {
    throw ConfigError("regress", "expected response~pred1,pred2,...");
  }
  RegressionSpec s;
  s.response = text.substr(0, tilde);
  std::string rest = text.substr(tilde + 1);
  std::size_t start = 0;
  while (start <= rest.size()) {
    const auto comma = rest.find(',', start);
    const std::string name = rest.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (name.empty()) throw ConfigError("regress", "empty predictor name");
    s.predictors.push_back(name);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return s;
}

inline EvaluationReport evaluate(const Dataset& orig, const Dataset& pert,
                                 const std::optional<RegressionSpec>& regress,
                                 unsigned workers = 1) {
  require_paired(orig, pert);
  EvaluationReport r;
  r.correlation = correlation_report(orig, pert);
  r.privacy = privacy_report(orig, pert, workers);
  r.pca = pca_report(orig, pert);
  if (regress) {
    r.regression = regression_report(orig, pert, regress->response,
                                     regress->predictors);
  }
  return r;
}

namespace detail {

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json optional_array(
    const std::vector<std::optional<double>>& xs) {
  auto a = nlohmann::json::array();
  for (const auto& x : xs) a.push_back(optional_json(x));
  return a;
}

inline nlohmann::json finite_array(const std::vector<double>& xs) {
  auto a = nlohmann::json::array();
  for (double x : xs) {
    a.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
  }
  return a;
}

inline nlohmann::json summary_json(const Summary& s) {
  return {{"count", s.count}, {"min", s.min},       {"q1", s.q1},
          {"median", s.median}, {"q3", s.q3}, {"max", s.max}};
}

inline nlohmann::json fit_json(const RegressionFit& f) {
  return {{"rows_used", f.rows.size()},
          {"coefficients", finite_array(f.coefficients)},
          {"std_errors", finite_array(f.std_errors)},
          {"residual_variance", f.residual_variance},
          {"max_cooks_distance", f.max_cooks()},
          {"record_index", f.rows},
          {"cooks_distance", finite_array(f.cooks)}};
}

inline nlohmann::json pca_json(const PcaResult& p) {
  return {{"columns", p.columns},         {"rows_used", p.rows_used},
          {"std_devs", p.std_devs},       {"proportions", p.proportions},
          {"converged", p.converged},     {"sweeps", p.sweeps}};
}

}  // namespace detail

inline nlohmann::json report_to_json(const EvaluationReport& r) {
  using detail::optional_array;
  nlohmann::json j;
  const auto& c = r.correlation;
  j["correlation"] = {{"columns", c.columns},
                      {"missing_handling", "pairwise-complete"},
                      {"original", optional_array(c.original)},
                      {"perturbed", optional_array(c.perturbed)},
                      {"delta", optional_array(c.delta)},
                      {"compared_pairs", c.compared_pairs},
                      {"sign_flips", c.sign_flips},
                      {"mean_abs_delta", c.mean_abs_delta},
                      {"max_abs_delta", c.max_abs_delta}};
  const auto& p = r.privacy;
  j["privacy"] = {
      {"numeric_columns", p.numeric_columns},
      {"identical_row_fraction", p.identical_row_fraction},
      {"mahalanobis",
       {{"original", optional_array(p.mahalanobis_original.distances)},
        {"perturbed", optional_array(p.mahalanobis_perturbed.distances)},
        {"original_max", p.mahalanobis_original.max()},
        {"perturbed_max", p.mahalanobis_perturbed.max()},
        {"original_pseudo_inverse", p.mahalanobis_original.pseudo_inverse},
        {"perturbed_pseudo_inverse", p.mahalanobis_perturbed.pseudo_inverse}}},
      {"min_distance",
       {{"original", optional_array(p.min_distance_original)},
        {"perturbed", optional_array(p.min_distance_perturbed)},
        {"original_summary", detail::summary_json(summarize(p.min_distance_original))},
        {"perturbed_summary",
         detail::summary_json(summarize(p.min_distance_perturbed))}}},
      {"distance_to_origin", optional_array(p.distance_to_origin)}};
  j["pca"] = {{"original", detail::pca_json(r.pca.original)},
              {"perturbed", detail::pca_json(r.pca.perturbed)}};
  if (r.regression) {
    const auto& g = *r.regression;
    j["regression"] = {{"response", g.response},
                       {"predictors", g.predictors},
                       {"original", detail::fit_json(g.original)},
                       {"perturbed", detail::fit_json(g.perturbed)},
                       {"se_ratios", detail::finite_array(g.se_ratios())},
                       {"sign_flips", g.sign_flips()}};
  } else {
    j["regression"] = nullptr;
  }
  return j;
}

namespace detail {

inline std::string cell_text(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? format_number(*v) : std::string("NA");
}

}  // namespace detail

// CSV tables mirroring the report sections, keyed by file name.
inline std::vector<std::pair<std::string, std::string>> report_tables(
    const EvaluationReport& r) {
  using detail::cell_text;
  std::vector<std::pair<std::string, std::string>> out;
  {
    const auto& c = r.correlation;
    std::string t = "row,column,original,perturbed,delta\n";
    for (std::size_t a = 0; a < c.dim(); ++a) {
      for (std::size_t b = 0; b < c.dim(); ++b) {
        const std::size_t k = a * c.dim() + b;
        t += c.columns[a] + ',' + c.columns[b] + ',' + cell_text(c.original[k]) +
             ',' + cell_text(c.perturbed[k]) + ',' + cell_text(c.delta[k]) + '\n';
      }
    }
    out.emplace_back("correlation.csv", std::move(t));
  }
  {
    const auto& p = r.privacy;
    std::string t =
        "record_index,mahalanobis_original,mahalanobis_perturbed,"
        "min_distance_original,min_distance_perturbed,distance_to_origin\n";
    for (std::size_t i = 0; i < p.min_distance_original.size(); ++i) {
      t += std::to_string(i) + ',' +
           cell_text(p.mahalanobis_original.distances[i]) + ',' +
           cell_text(p.mahalanobis_perturbed.distances[i]) + ',' +
           cell_text(p.min_distance_original[i]) + ',' +
           cell_text(p.min_distance_perturbed[i]) + ',' +
           cell_text(p.distance_to_origin[i]) + '\n';
    }
    out.emplace_back("privacy.csv", std::move(t));

    std::string q = "dataset,count,min,q1,median,q3,max\n";
    auto row = [&](const char* name, const Summary& s) {
      q += std::string(name) + ',' + std::to_string(s.count) + ',' +
           format_number(s.min) + ',' + format_number(s.q1) + ',' +
           format_number(s.median) + ',' + format_number(s.q3) + ',' +
           format_number(s.max) + '\n';
    };
    row("original", summarize(p.min_distance_original));
    row("perturbed", summarize(p.min_distance_perturbed));
    out.emplace_back("min_distance_quartiles.csv", std::move(q));
  }
  {
    std::string t = "dataset,component,std_dev,proportion\n";
    auto rows = [&](const char* name, const PcaResult& p) {
      for (std::size_t c = 0; c < p.std_devs.size(); ++c) {
        t += std::string(name) + ',' + std::to_string(c + 1) + ',' +
             format_number(p.std_devs[c]) + ',' +
             format_number(p.proportions[c]) + '\n';
      }
    };
    rows("original", r.pca.original);
    rows("perturbed", r.pca.perturbed);
    out.emplace_back("pca.csv", std::move(t));
  }
  if (r.regression) {
    const auto& g = *r.regression;
    std::string t = "term,coef_original,se_original,coef_perturbed,se_perturbed\n";
    for (std::size_t c = 0; c < g.original.coefficients.size(); ++c) {
      t += (c == 0 ? std::string("(intercept)") : g.predictors[c - 1]) + ',' +
           format_number(g.original.coefficients[c]) + ',' +
           format_number(g.original.std_errors[c]) + ',' +
           format_number(g.perturbed.coefficients[c]) + ',' +
           format_number(g.perturbed.std_errors[c]) + '\n';
    }
    out.emplace_back("regression.csv", std::move(t));

    std::string k = "dataset,record_index,cooks_distance\n";
    auto rows = [&](const char* name, const RegressionFit& f) {
      for (std::size_t r2 = 0; r2 < f.rows.size(); ++r2) {
        k += std::string(name) + ',' + std::to_string(f.rows[r2]) + ',' +
             cell_text(f.cooks[r2]) + '\n';
      }
    };
    rows("original", g.original);
    rows("perturbed", g.perturbed);
    out.emplace_back("cooks_distance.csv", std::move(k));
  }
  return out;
}

}  // namespace rwn
