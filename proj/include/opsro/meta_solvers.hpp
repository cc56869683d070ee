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

#ifndef OPSRO_META_SOLVERS_HPP_
#define OPSRO_META_SOLVERS_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "opsro/empirical_game.hpp"
#include "opsro/normal_form.hpp"

namespace opsro {

enum class SolverKind { kRD, kRRD, kR2D, kR3D };

SolverKind parse_solver_kind(const std::string& name);
std::string solver_kind_name(SolverKind kind);

struct SolverConfig {
  SolverKind kind = SolverKind::kRD;
  double step_size = 1e-2;
  int max_steps = 100000;
  double convergence_tol = 1e-8;  // on max |delta sigma|
  double regret_threshold = 0.1;  // RRD and R3D only
  // The first run starts at uniform; later ones at Dirichlet(1) draws.
  int restarts = 1;
  std::uint64_t seed = 0;

  void validate() const;
  std::string canonical_string() const;
};

enum class StopReason { kConverged, kThreshold, kMaxSteps };
std::string stop_reason_name(StopReason reason);

struct SolveResult {
  MixedStrategy profile;
  int steps_taken = 0;
  StopReason stop_reason = StopReason::kMaxSteps;
  // Summed regret for RD/RRD, worst-case regret for R2D/R3D.
  double final_metric = 0.0;
  bool operator==(const SolveResult& o) const {
    return profile.weights == o.profile.weights &&
           steps_taken == o.steps_taken && stop_reason == o.stop_reason &&
           final_metric == o.final_metric;
  }
};

// Called with the profile before the first step and after every step.
using StepObserver = std::function<void(int step, const MixedStrategy&)>;

// Symmetric-game helpers. Row player payoffs A[k][l] = u_0(k, l).
std::vector<double> strategy_payoffs(const NormalFormGame& game,
                                     const MixedStrategy& sigma);
double symmetric_value(const NormalFormGame& game, const MixedStrategy& sigma);
// Sum over players of the best pure-deviation gain.
double symmetric_regret(const NormalFormGame& game, const MixedStrategy& sigma);

// One Euler step of replicator dynamics without clipping.
std::vector<double> rd_delta(const NormalFormGame& game,
                             const MixedStrategy& sigma, double step_size);

enum class Bound { kLower, kUpper };
// Bound on u(pi^k, sigma).
double bound_deviation(const BoundedNFG& game, int k, const MixedStrategy& sigma,
                       Bound bound);
// Bound on u(sigma, sigma).
double bound_value(const BoundedNFG& game, const MixedStrategy& sigma,
                   Bound bound);

double ubdp(const BoundedNFG& game, int k, const MixedStrategy& sigma);
double ubdr(const BoundedNFG& game, int k, const MixedStrategy& sigma);
double worst_case_regret(const BoundedNFG& game, const MixedStrategy& sigma);

SolveResult solve_rd(const NormalFormGame& mean_game, const SolverConfig& cfg,
                     const StepObserver& observer = {});
SolveResult solve_rrd(const NormalFormGame& mean_game, const SolverConfig& cfg,
                      const StepObserver& observer = {});
SolveResult solve_r2d(const BoundedNFG& game, const SolverConfig& cfg,
                      const StepObserver& observer = {});
SolveResult solve_r3d(const BoundedNFG& game, const SolverConfig& cfg,
                      const StepObserver& observer = {});

// Dispatch on cfg.kind: RD and RRD read the mean view.
SolveResult solve(const BoundedNFG& game, const SolverConfig& cfg,
                  const StepObserver& observer = {});

}  // namespace opsro

#endif  // OPSRO_META_SOLVERS_HPP_
