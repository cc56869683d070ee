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

#ifndef OPSRO_EVALUATION_HPP_
#define OPSRO_EVALUATION_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "opsro/dynamics_model.hpp"
#include "opsro/game.hpp"
#include "opsro/normal_form.hpp"
#include "opsro/policy.hpp"
#include "opsro/psro_driver.hpp"
#include "opsro/response_oracle.hpp"

namespace opsro {

class SearchBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExactSearchConfig {
  // Root draws used to estimate the best-response value.
  int contexts = 200;
  // Opponent private-information draws per context; the search is exact with
  // respect to this sampled prior.
  int opponent_samples = 8;
  long long node_budget = 20000000;
  std::uint64_t seed = 0;

  void validate() const;
};

// Expectimax best response for one seat. Decisions at every own information
// state come from a search over (opponent strategy, opponent private draw)
// hypotheses. Plans are cached per root context.
class ExactBestResponsePolicy final : public Policy {
 public:
  ExactBestResponsePolicy(std::shared_ptr<const StochasticGame> game,
                          std::vector<PolicyPtr> opponents,
                          MixedStrategy opponent_mix, int player,
                          ExactSearchConfig cfg);

  std::vector<double> action_probabilities(
      std::span<const double> infostate, const LegalMask& legal) const override;
  ActionId act(std::span<const double> infostate, const LegalMask& legal,
               Rng& rng) const override;
  bool deterministic() const override { return true; }
  std::string kind() const override { return "exact"; }
  int player() const { return player_; }

  struct ContextResult {
    double decision_value = 0.0;  // under the sampled prior
    double true_value = 0.0;      // against the actual root, if supplied
    std::size_t plan_size = 0;
  };
  // Searches from `root`. When `evaluate_root` is set the plan is also scored
  // against the real private information in `root`.
  ContextResult solve_context(const State& root, bool evaluate_root) const;

 private:
  using Plan = std::map<std::vector<ActionId>, ActionId>;
  const Plan& plan_for(const State& root, std::uint64_t* key) const;
  ActionId choose(std::span<const double> infostate, const LegalMask& legal) const;

  std::shared_ptr<const StochasticGame> game_;
  const ExactSearchSupport* support_;
  std::vector<PolicyPtr> opponents_;
  MixedStrategy mix_;
  int player_;
  ExactSearchConfig cfg_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::uint64_t, Plan> plans_;
};

struct ExactBestResponse {
  std::shared_ptr<const ExactBestResponsePolicy> policy;
  double value = 0.0;
  double std_error = 0.0;
};

// Throws SearchBudgetExceeded when a context needs more than
// cfg.node_budget nodes, std::invalid_argument when the game lacks
// ExactSearchSupport or has more than two players.
ExactBestResponse exact_best_response(std::shared_ptr<const StochasticGame> game,
                                      std::span<const PolicyPtr> opponents,
                                      const MixedStrategy& opponent_mix,
                                      int player, const ExactSearchConfig& cfg);

// Best-response value averaged over both seats, half the contexts each.
double symmetric_best_response_value(std::shared_ptr<const StochasticGame> game,
                                     std::span<const PolicyPtr> opponents,
                                     const MixedStrategy& opponent_mix,
                                     const ExactSearchConfig& cfg);

enum class OracleKind { kNone, kDdqnOnline, kExactTreeSearch };
OracleKind parse_oracle_kind(const std::string& name);
std::string oracle_kind_name(OracleKind kind);

struct EvalConfig {
  int eval_window = 20;
  int true_simulations = 1000;
  OracleKind oracle = OracleKind::kExactTreeSearch;
  ExactSearchConfig exact;
  DdqnConfig ddqn;  // ddqn_online oracle

  void validate() const;
};

struct RegretRow {
  int iteration = 0;
  double summed_regret = 0.0;      // clamped at 0 per player
  double raw_summed_regret = 0.0;  // signed
  std::vector<double> per_player;  // clamped
  double profile_value = 0.0;      // u_i(sigma)
  double best_in_set = 0.0;        // best deviation inside the strategy set
  double oracle_value = 0.0;
  bool oracle_used = false;
  bool oracle_failed = false;
  std::string failure;
};

struct RegretReport {
  std::vector<RegretRow> rows;
  int oracle_strategy_count = 0;
};

// Mean true payoff matrix A[k][l] = u_0(k, l) over the listed columns; other
// columns are left at zero.
NormalFormGame true_payoff_matrix(std::span<const PolicyPtr> strategies,
                                  const std::vector<int>& columns,
                                  const StochasticGame& true_game,
                                  int num_simulations, Rng& rng);

RegretReport true_game_regret(std::span<const PolicyPtr> strategies,
                              std::span<const MixedStrategy> profiles,
                              std::shared_ptr<const StochasticGame> true_game,
                              const EvalConfig& cfg, Rng& rng);
RegretReport true_game_regret(const RunArtifacts& artifacts,
                              std::shared_ptr<const StochasticGame> true_game,
                              const EvalConfig& cfg, Rng& rng);

// Average over all pure profiles of the summed absolute per-player gap.
double model_fidelity(const NormalFormGame& truth, const NormalFormGame& model);
double model_fidelity(std::span<const PolicyPtr> strategies,
                      std::shared_ptr<const ModelMdp> model,
                      const StochasticGame& true_game, int num_simulations,
                      Rng& rng);

double mean_rho(std::span<const double> rho_log);
double mean_rho(const RunArtifacts& artifacts);

// Two-sided Welch t-test p-value.
double welch_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace opsro

#endif  // OPSRO_EVALUATION_HPP_
