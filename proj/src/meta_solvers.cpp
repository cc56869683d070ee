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

#include "opsro/meta_solvers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace opsro {

SolverKind parse_solver_kind(const std::string& name) {
  std::string up = name;
  for (auto& c : up) c = static_cast<char>(std::toupper(c));
  if (up == "RD") return SolverKind::kRD;
  if (up == "RRD") return SolverKind::kRRD;
  if (up == "R2D") return SolverKind::kR2D;
  if (up == "R3D") return SolverKind::kR3D;
  throw std::invalid_argument("unknown meta-solver '" + name + "'");
}

std::string solver_kind_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::kRD: return "RD";
    case SolverKind::kRRD: return "RRD";
    case SolverKind::kR2D: return "R2D";
    case SolverKind::kR3D: return "R3D";
  }
  return "?";
}

void SolverConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("solver: step_size <= 0");
  if (max_steps < 0) throw std::invalid_argument("solver: max_steps < 0");
  if (convergence_tol < 0.0)
    throw std::invalid_argument("solver: convergence_tol < 0");
  if (!(regret_threshold >= 0.0))
    throw std::invalid_argument("solver: regret_threshold < 0");
  if (restarts < 1) throw std::invalid_argument("solver: restarts < 1");
}

std::string SolverConfig::canonical_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "mss;kind=" << solver_kind_name(kind) << ";eta=" << step_size
     << ";max_steps=" << max_steps << ";tol=" << convergence_tol
     << ";threshold=" << regret_threshold << ";restarts=" << restarts
     << ";seed=" << seed;
  return os.str();
}

std::string stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::kConverged: return "converged";
    case StopReason::kThreshold: return "threshold";
    case StopReason::kMaxSteps: return "max_steps";
  }
  return "?";
}

namespace {

int size_of(const NormalFormGame& game) {
  if (game.num_players() != 2 || game.strategy_counts()[0] != game.strategy_counts()[1])
    throw std::invalid_argument("meta-solver: need a square two-player game");
  return game.strategy_counts()[0];
}

void check_sigma(int m, const MixedStrategy& sigma) {
  if (sigma.size() != m) throw std::invalid_argument("profile size mismatch");
}

void check_index(int m, int k) {
  if (k < 0 || k >= m) throw std::out_of_range("strategy index out of range");
}

double row_payoff(const NormalFormGame& game, int k, const MixedStrategy& sigma) {
  double u = 0.0;
  int profile[2] = {k, 0};
  for (int l = 0; l < sigma.size(); ++l) {
    if (sigma.weights[l] == 0.0) continue;
    profile[1] = l;
    u += sigma.weights[l] * game.payoff(profile, 0);
  }
  return u;
}

double value_of(const NormalFormGame& game, const MixedStrategy& sigma) {
  double u = 0.0;
  for (int k = 0; k < sigma.size(); ++k)
    if (sigma.weights[k] != 0.0) u += sigma.weights[k] * row_payoff(game, k, sigma);
  return u;
}

void check_symmetric(const NormalFormGame& game) {
  size_of(game);
  if (!game.is_symmetric(1e-9))
    throw std::invalid_argument("meta-solver: game is not symmetric");
}

Eigen::MatrixXd row_matrix(const NormalFormGame& game);

// Growth term g_k in sigma_k += eta * sigma_k * g_k.
using GrowthFn = std::function<std::vector<double>(const MixedStrategy&)>;
using MetricFn = std::function<double(const MixedStrategy&)>;

SolveResult integrate(int m, const MixedStrategy& init, const GrowthFn& growth,
                      const MetricFn& metric, bool use_threshold,
                      const SolverConfig& cfg, const StepObserver& observer) {
  SolveResult r;
  r.profile = init;
  if (observer) observer(0, r.profile);
  if (m == 1) {
    r.stop_reason = StopReason::kConverged;
    r.final_metric = metric(r.profile);
    return r;
  }
  for (;;) {
    if (use_threshold && metric(r.profile) <= cfg.regret_threshold) {
      r.stop_reason = StopReason::kThreshold;
      break;
    }
    if (r.steps_taken >= cfg.max_steps) {
      r.stop_reason = StopReason::kMaxSteps;
      break;
    }
    const std::vector<double> g = growth(r.profile);
    std::vector<double> next(m);
    double total = 0.0;
    for (int k = 0; k < m; ++k) {
      const double s = r.profile.weights[k];
      next[k] = std::max(0.0, s + cfg.step_size * s * g[k]);
      total += next[k];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
      // Every weight was clipped away; fall back to the fittest strategy.
      const auto best = std::max_element(g.begin(), g.end()) - g.begin();
      next.assign(m, 0.0);
      next[best] = 1.0;
      total = 1.0;
    }
    double max_change = 0.0;
    for (int k = 0; k < m; ++k) {
      next[k] /= total;
      max_change = std::max(max_change, std::abs(next[k] - r.profile.weights[k]));
    }
    r.profile.weights = std::move(next);
    ++r.steps_taken;
    if (observer) observer(r.steps_taken, r.profile);
    if (max_change < cfg.convergence_tol) {
      r.stop_reason = StopReason::kConverged;
      break;
    }
  }
  r.final_metric = metric(r.profile);
  return r;
}

MixedStrategy dirichlet_start(int m, std::uint64_t seed, int restart) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
  std::exponential_distribution<double> e(1.0);
  MixedStrategy s{std::vector<double>(m)};
  double total = 0.0;
  for (auto& w : s.weights) total += (w = e(rng));
  for (auto& w : s.weights) w /= total;
  return s;
}

SolveResult with_restarts(int m, const GrowthFn& growth, const MetricFn& metric,
                          bool use_threshold, const SolverConfig& cfg,
                          const StepObserver& observer) {
  cfg.validate();
  SolveResult best =
      integrate(m, MixedStrategy::uniform(m), growth, metric, use_threshold,
                cfg, observer);
  for (int r = 1; r < cfg.restarts && m > 1; ++r) {
    SolveResult next = integrate(m, dirichlet_start(m, cfg.seed, r), growth,
                                 metric, use_threshold, cfg, observer);
    if (next.final_metric < best.final_metric) best = std::move(next);
  }
  return best;
}

SolveResult replicator(const NormalFormGame& game, const SolverConfig& cfg,
                       bool use_threshold, const StepObserver& observer) {
  check_symmetric(game);
  const int m = size_of(game);
  const Eigen::MatrixXd a = row_matrix(game);
  GrowthFn growth = [&](const MixedStrategy& s) {
    const Eigen::Map<const Eigen::VectorXd> w(s.weights.data(), m);
    const Eigen::VectorXd u = a * w;
    const double avg = w.dot(u);
    std::vector<double> g(m);
    for (int k = 0; k < m; ++k) g[k] = u[k] - avg;
    return g;
  };
  MetricFn metric = [&](const MixedStrategy& s) {
    const Eigen::Map<const Eigen::VectorXd> w(s.weights.data(), m);
    const Eigen::VectorXd u = a * w;
    return game.num_players() * std::max(0.0, u.maxCoeff() - w.dot(u));
  };
  return with_restarts(m, growth, metric, use_threshold, cfg, observer);
}

Eigen::MatrixXd row_matrix(const NormalFormGame& game) {
  const int m = size_of(game);
  Eigen::MatrixXd a(m, m);
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) {
      const int profile[2] = {k, l};
      a(k, l) = game.payoff(profile, 0);
    }
  return a;
}

// Member bounds of u(pi^k, sigma) and u(sigma, sigma) for every k at once.
struct BoundCache {
  Eigen::VectorXd lower, upper;
  double lower_value = 0.0;
};

class RobustView {
 public:
  explicit RobustView(const BoundedNFG& game) {
    if (game.members.empty()) {
      lower_ = row_matrix(game.lower);
      upper_ = row_matrix(game.upper);
    } else {
      for (const auto& g : game.members) members_.push_back(row_matrix(g));
    }
  }

  BoundCache bounds(const MixedStrategy& sigma) const {
    const Eigen::Map<const Eigen::VectorXd> s(sigma.weights.data(), sigma.size());
    BoundCache c;
    if (members_.empty()) {
      c.lower = lower_ * s;
      c.upper = upper_ * s;
      c.lower_value = s.dot(c.lower);
      return c;
    }
    for (std::size_t j = 0; j < members_.size(); ++j) {
      const Eigen::VectorXd row = members_[j] * s;
      const double value = s.dot(row);
      if (j == 0) {
        c.lower = c.upper = row;
        c.lower_value = value;
      } else {
        c.lower = c.lower.cwiseMin(row);
        c.upper = c.upper.cwiseMax(row);
        c.lower_value = std::min(c.lower_value, value);
      }
    }
    return c;
  }

 private:
  Eigen::MatrixXd lower_, upper_;
  std::vector<Eigen::MatrixXd> members_;
};

SolveResult robust_replicator(const BoundedNFG& game, const SolverConfig& cfg,
                              bool use_threshold, const StepObserver& observer) {
  check_symmetric(game.mean);
  const int m = size_of(game.mean);
  const RobustView view(game);
  GrowthFn growth = [&](const MixedStrategy& s) {
    const BoundCache c = view.bounds(s);
    // UBDP_k - UBDR_k with the max over j != k taken from the top two.
    int top = 0;
    for (int k = 1; k < m; ++k)
      if (c.upper[k] > c.upper[top]) top = k;
    double second = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k)
      if (k != top) second = std::max(second, c.upper[k]);
    std::vector<double> g(m);
    for (int k = 0; k < m; ++k) {
      const double others = k == top ? second : c.upper[top];
      g[k] = (c.upper[k] - c.lower_value) - (others - c.lower[k]);
    }
    return g;
  };
  MetricFn metric = [&](const MixedStrategy& s) {
    const BoundCache c = view.bounds(s);
    return game.mean.num_players() *
           std::max(0.0, c.upper.maxCoeff() - c.lower_value);
  };
  return with_restarts(m, growth, metric, use_threshold, cfg, observer);
}

}  // namespace

std::vector<double> strategy_payoffs(const NormalFormGame& game,
                                     const MixedStrategy& sigma) {
  const int m = size_of(game);
  check_sigma(m, sigma);
  std::vector<double> out(m);
  for (int k = 0; k < m; ++k) out[k] = row_payoff(game, k, sigma);
  return out;
}

double symmetric_value(const NormalFormGame& game, const MixedStrategy& sigma) {
  check_sigma(size_of(game), sigma);
  return value_of(game, sigma);
}

double symmetric_regret(const NormalFormGame& game, const MixedStrategy& sigma) {
  const MixedStrategy both[2] = {sigma, sigma};
  const auto r = regret(game, both);
  return r[0] + r[1];
}

std::vector<double> rd_delta(const NormalFormGame& game,
                             const MixedStrategy& sigma, double step_size) {
  std::vector<double> u = strategy_payoffs(game, sigma);
  const double avg = value_of(game, sigma);
  for (int k = 0; k < sigma.size(); ++k)
    u[k] = step_size * sigma.weights[k] * (u[k] - avg);
  return u;
}

double bound_deviation(const BoundedNFG& game, int k, const MixedStrategy& sigma,
                       Bound bound) {
  const int m = size_of(game.mean);
  check_index(m, k);
  check_sigma(m, sigma);
  if (game.members.empty())
    return row_payoff(bound == Bound::kUpper ? game.upper : game.lower, k, sigma);
  double best = row_payoff(game.members[0], k, sigma);
  for (std::size_t j = 1; j < game.members.size(); ++j) {
    const double u = row_payoff(game.members[j], k, sigma);
    best = bound == Bound::kUpper ? std::max(best, u) : std::min(best, u);
  }
  return best;
}

double bound_value(const BoundedNFG& game, const MixedStrategy& sigma,
                   Bound bound) {
  check_sigma(size_of(game.mean), sigma);
  if (game.members.empty())
    return value_of(bound == Bound::kUpper ? game.upper : game.lower, sigma);
  double best = value_of(game.members[0], sigma);
  for (std::size_t j = 1; j < game.members.size(); ++j) {
    const double u = value_of(game.members[j], sigma);
    best = bound == Bound::kUpper ? std::max(best, u) : std::min(best, u);
  }
  return best;
}

double ubdp(const BoundedNFG& game, int k, const MixedStrategy& sigma) {
  return bound_deviation(game, k, sigma, Bound::kUpper) -
         bound_value(game, sigma, Bound::kLower);
}

double ubdr(const BoundedNFG& game, int k, const MixedStrategy& sigma) {
  const int m = size_of(game.mean);
  check_index(m, k);
  if (m == 1) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < m; ++j)
    if (j != k) best = std::max(best, bound_deviation(game, j, sigma, Bound::kUpper));
  return best - bound_deviation(game, k, sigma, Bound::kLower);
}

double worst_case_regret(const BoundedNFG& game, const MixedStrategy& sigma) {
  const int m = size_of(game.mean);
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < m; ++k)
    best = std::max(best, bound_deviation(game, k, sigma, Bound::kUpper));
  const double gain = std::max(0.0, best - bound_value(game, sigma, Bound::kLower));
  return game.mean.num_players() * gain;
}

SolveResult solve_rd(const NormalFormGame& mean_game, const SolverConfig& cfg,
                     const StepObserver& observer) {
  return replicator(mean_game, cfg, false, observer);
}

SolveResult solve_rrd(const NormalFormGame& mean_game, const SolverConfig& cfg,
                      const StepObserver& observer) {
  return replicator(mean_game, cfg, true, observer);
}

SolveResult solve_r2d(const BoundedNFG& game, const SolverConfig& cfg,
                      const StepObserver& observer) {
  return robust_replicator(game, cfg, false, observer);
}

SolveResult solve_r3d(const BoundedNFG& game, const SolverConfig& cfg,
                      const StepObserver& observer) {
  return robust_replicator(game, cfg, true, observer);
}

SolveResult solve(const BoundedNFG& game, const SolverConfig& cfg,
                  const StepObserver& observer) {
  switch (cfg.kind) {
    case SolverKind::kRD: return solve_rd(game.mean, cfg, observer);
    case SolverKind::kRRD: return solve_rrd(game.mean, cfg, observer);
    case SolverKind::kR2D: return solve_r2d(game, cfg, observer);
    case SolverKind::kR3D: return solve_r3d(game, cfg, observer);
  }
  throw std::invalid_argument("unknown solver kind");
}

}  // namespace opsro
