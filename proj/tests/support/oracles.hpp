// Copyright 2026 The opsro Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPSRO_TESTS_SUPPORT_ORACLES_HPP_
#define OPSRO_TESTS_SUPPORT_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "opsro/normal_form.hpp"

namespace opsro::testing {

// Brute force: player i's best pure deviation payoff minus u_i(sigma), by
// explicit double sums over the 2-player table.
inline std::vector<double> brute_force_regret(const NormalFormGame& g,
                                              const std::vector<MixedStrategy>& p) {
  const int r = g.strategy_counts()[0], c = g.strategy_counts()[1];
  std::vector<double> value(2, 0.0);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      const int prof[2] = {i, j};
      for (int k = 0; k < 2; ++k)
        value[k] += p[0].weights[i] * p[1].weights[j] * g.payoff(prof, k);
    }
  double best0 = -1e300, best1 = -1e300;
  for (int i = 0; i < r; ++i) {
    double v = 0.0;
    for (int j = 0; j < c; ++j) {
      const int prof[2] = {i, j};
      v += p[1].weights[j] * g.payoff(prof, 0);
    }
    best0 = std::max(best0, v);
  }
  for (int j = 0; j < c; ++j) {
    double v = 0.0;
    for (int i = 0; i < r; ++i) {
      const int prof[2] = {i, j};
      v += p[0].weights[i] * g.payoff(prof, 1);
    }
    best1 = std::max(best1, v);
  }
  return {best0 - value[0], best1 - value[1]};
}

// Brute-force rho: every ordered pair, per-player absolute gaps summed.
inline double rho_oracle(const std::vector<std::vector<double>>& r) {
  double best = 0.0;
  for (const auto& a : r)
    for (const auto& b : r) {
      double d = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
      best = std::max(best, d);
    }
  return best;
}

// Independent Welch reference: regularized incomplete beta by Lentz's
// continued fraction.
inline double betacf(double a, double b, double x) {
  const double tiny = 1e-300;
  double c = 1.0, d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return h;
}

inline double ibeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                     a * std::log(x) + b * std::log(1.0 - x);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(lbt) * betacf(a, b, x) / a;
  return 1.0 - std::exp(lbt) * betacf(b, a, 1.0 - x) / b;
}

inline double welch_reference(const std::vector<double>& a, const std::vector<double>& b) {
  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  };
  auto var = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
  };
  const double qa = var(a) / a.size(), qb = var(b) / b.size();
  const double t = (mean(a) - mean(b)) / std::sqrt(qa + qb);
  const double df = (qa + qb) * (qa + qb) /
                    (qa * qa / (a.size() - 1) + qb * qb / (b.size() - 1));
  return ibeta(0.5 * df, 0.5, df / (df + t * t));
}

}  // namespace opsro::testing

#endif  // OPSRO_TESTS_SUPPORT_ORACLES_HPP_
