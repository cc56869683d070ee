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

#ifndef OPSRO_EMPIRICAL_GAME_HPP_
#define OPSRO_EMPIRICAL_GAME_HPP_

#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "opsro/dynamics_model.hpp"
#include "opsro/game.hpp"
#include "opsro/normal_form.hpp"
#include "opsro/policy.hpp"

namespace opsro {

struct PayoffEntry {
  // per_member_utilities[j][i]: member j's utility estimate for player i.
  std::vector<std::vector<double>> per_member_utilities;
  std::vector<double> mean_utilities;
  int num_samples = 0;

  std::vector<double> lower() const;
  std::vector<double> upper() const;
  // Same entry seen with the two seats exchanged.
  PayoffEntry swapped() const;
  bool operator==(const PayoffEntry&) const = default;
};

// Builds an entry from member rows, filling in the mean.
PayoffEntry make_entry(std::vector<std::vector<double>> per_member,
                       int num_samples);

class PayoffEstimator {
 public:
  virtual ~PayoffEstimator() = default;
  virtual int num_members() const = 0;
  virtual int num_players() const = 0;
  // Averages `num_simulations` episodes of `profile`. Appends the mean
  // per-step rho of every episode to `rho_log` when the source has one.
  virtual PayoffEntry estimate(std::span<const PolicyPtr> profile,
                               int num_simulations, Rng& rng,
                               std::vector<double>* rho_log) const = 0;
};

class ModelPayoffEstimator final : public PayoffEstimator {
 public:
  explicit ModelPayoffEstimator(std::shared_ptr<const ModelMdp> model);
  int num_members() const override { return model_->ensemble().size(); }
  int num_players() const override { return model_->num_players(); }
  PayoffEntry estimate(std::span<const PolicyPtr> profile, int num_simulations,
                       Rng& rng, std::vector<double>* rho_log) const override;

 private:
  std::shared_ptr<const ModelMdp> model_;
};

// Single-member estimator backed by the real game.
class TrueGamePayoffEstimator final : public PayoffEstimator {
 public:
  explicit TrueGamePayoffEstimator(std::shared_ptr<const StochasticGame> game);
  int num_members() const override { return 1; }
  int num_players() const override { return game_->num_players(); }
  PayoffEntry estimate(std::span<const PolicyPtr> profile, int num_simulations,
                       Rng& rng, std::vector<double>* rho_log) const override;

 private:
  std::shared_ptr<const StochasticGame> game_;
};

PayoffEntry estimate_entry(const ModelMdp& model,
                           std::span<const PolicyPtr> profile,
                           int num_simulations, Rng& rng,
                           std::vector<double>* rho_log = nullptr);

struct BoundedNFG {
  NormalFormGame lower;
  NormalFormGame mean;
  NormalFormGame upper;
  // One game per ensemble member. When empty, mixed-profile bounds are taken
  // by mixing the pure-profile bounds instead of bounding member mixtures.
  std::vector<NormalFormGame> members;

  int num_strategies() const { return mean.strategy_counts().at(0); }
};

// Collapsed bounds: lower = mean = upper, a single member.
BoundedNFG collapsed_bounds(const NormalFormGame& mean);

// Symmetric two-player empirical game. Strategy a sits in seat 0 of the
// stored entry for key (a, b) with a <= b.
class EmpiricalGame {
 public:
  explicit EmpiricalGame(int num_simulations = 1000);

  int num_players() const { return 2; }
  int num_strategies() const { return static_cast<int>(strategies_.size()); }
  int num_simulations() const { return num_simulations_; }
  const std::vector<PolicyPtr>& strategies() const { return strategies_; }
  std::size_t num_entries() const { return table_.size(); }
  int num_members() const { return num_members_; }

  bool has_entry(int a, int b) const;
  // Utilities with strategy `a` in seat 0 and `b` in seat 1.
  PayoffEntry entry(int a, int b) const;
  void set_entry(int a, int b, PayoffEntry entry);

  // Adds a strategy and simulates every profile that involves it. Returns the
  // number of profiles simulated.
  int extend(PolicyPtr policy, const PayoffEstimator& estimator, Rng& rng);
  // Adds a strategy without simulating anything; entries must then be
  // supplied through set_entry.
  void add_strategy(PolicyPtr policy);
  bool complete() const;

  // Mean rho of every simulated episode, in simulation order.
  const std::vector<double>& rho_log() const { return rho_log_; }

  // Copy holding only the first `count` strategies and their entries.
  EmpiricalGame prefix(int count) const;

  nlohmann::json to_json() const;
  // Strategies are supplied separately; their count must match the dump.
  static EmpiricalGame from_json(const nlohmann::json& j,
                                 std::vector<PolicyPtr> strategies);

 private:
  int num_simulations_;
  int num_members_ = 0;
  std::vector<PolicyPtr> strategies_;
  std::map<std::pair<int, int>, PayoffEntry> table_;
  std::vector<double> rho_log_;
};

// Throws std::logic_error on an incomplete table. Diagonal entries average
// the two seats so every view is exactly symmetric.
BoundedNFG to_bounded_nfg(const EmpiricalGame& game);

NormalFormGame reconstruct_true(std::span<const PolicyPtr> strategies,
                                const StochasticGame& true_game,
                                int num_simulations, Rng& rng);

// Symmetric two-player game from per-pair entries; used by both the model and
// true reconstructions.
NormalFormGame symmetric_game_from(
    int num_strategies, const std::map<std::pair<int, int>, PayoffEntry>& table,
    int member);

}  // namespace opsro

#endif  // OPSRO_EMPIRICAL_GAME_HPP_
