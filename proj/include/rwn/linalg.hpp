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

// Small dense helpers shared by the metrics: a symmetric eigensolver and
// sample quantiles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace rwn {

struct SymmetricEigen {
  std::vector<double> values;  // decreasing
  Eigen::MatrixXd vectors;     // column c belongs to values[c]
  int sweeps = 0;
  bool converged = false;
};

// Cyclic Jacobi rotations. Stops once the off-diagonal Frobenius norm is
// at most `tolerance` or after `max_sweeps` full sweeps.
inline SymmetricEigen jacobi_eigen(Eigen::MatrixXd a, double tolerance = 1e-12,
                                   int max_sweeps = 100) {
  const Eigen::Index p = a.rows();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(p, p);
  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index r = 0; r < p; ++r)
      for (Eigen::Index c = 0; c < p; ++c)
        if (r != c) s += a(r, c) * a(r, c);
    return std::sqrt(s);
  };
  SymmetricEigen out;
  while (true) {
    if (off_norm() <= tolerance) {
      out.converged = true;
      break;
    }
    if (out.sweeps == max_sweeps) break;
    ++out.sweeps;
    for (Eigen::Index r = 0; r < p - 1; ++r) {
      for (Eigen::Index c = r + 1; c < p; ++c) {
        const double arc = a(r, c);
        if (arc == 0.0) continue;
        const double theta = (a(c, c) - a(r, r)) / (2.0 * arc);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (Eigen::Index k = 0; k < p; ++k) {
          const double akr = a(k, r), akc = a(k, c);
          a(k, r) = cs * akr - sn * akc;
          a(k, c) = sn * akr + cs * akc;
        }
        for (Eigen::Index k = 0; k < p; ++k) {
          const double ark = a(r, k), ack = a(c, k);
          a(r, k) = cs * ark - sn * ack;
          a(c, k) = sn * ark + cs * ack;
        }
        for (Eigen::Index k = 0; k < p; ++k) {
          const double vkr = v(k, r), vkc = v(k, c);
          v(k, r) = cs * vkr - sn * vkc;
          v(k, c) = sn * vkr + cs * vkc;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) {
    return a(x, x) > a(y, y);
  });
  out.vectors.resize(p, p);
  for (Eigen::Index c = 0; c < p; ++c) {
    out.values.push_back(a(order[c], order[c]));
    out.vectors.col(c) = v.col(order[c]);
  }
  return out;
}

// Linear-interpolation quantile (R type 7) of an unsorted sample.
inline double quantile(std::vector<double> xs, double level) {
  if (xs.empty()) return std::nan("");
  std::sort(xs.begin(), xs.end());
  const double h = level * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace rwn
