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

#ifndef OPSRO_BARGAINING_HPP_
#define OPSRO_BARGAINING_HPP_

#include <span>
#include <string>
#include <vector>

#include "opsro/common.hpp"
#include "opsro/game.hpp"

namespace opsro {

struct BargainingConfig {
  int n_items = 3;
  double valuation_min = 5.0;
  double valuation_max = 10.0;
  int pool_min = 5;
  int pool_max = 7;
  int max_turns = 10;
  double discount = 0.99;

  // Two item types, pools of 2-3 items, four turns. Small enough for exact
  // backward-induction best responses.
  static BargainingConfig mini();

  // Throws std::invalid_argument on infeasible or out-of-range settings.
  void validate() const;
  std::string canonical_string() const;
};

struct Pool {
  std::vector<int> counts;
  bool operator==(const Pool&) const = default;
};

struct Valuation {
  std::vector<double> values;
  bool operator==(const Valuation&) const = default;
};

// Bijection between action indices and offer vectors. An offer lists how many
// items of each type go to the player receiving it. Index `accept_action()`
// (the last one) is ACCEPT.
class OfferCodec {
 public:
  explicit OfferCodec(const BargainingConfig& cfg);

  int num_offers() const { return num_offers_; }
  int num_actions() const { return num_offers_ + 1; }
  ActionId accept_action() const { return num_offers_; }
  // Largest count any single item type can have in a feasible pool.
  int max_item_count() const { return max_count_; }

  std::vector<int> offer(ActionId index) const;
  ActionId index(std::span<const int> offer) const;

 private:
  int n_items_;
  int max_count_;
  int num_offers_;
};

// Every pool satisfying the count constraints, in lexicographic order.
std::vector<Pool> feasible_pools(const BargainingConfig& cfg);

Pool sample_pool(const BargainingConfig& cfg, Rng& rng);
// Independent, identically distributed draws for the two players.
std::vector<Valuation> sample_valuations(const BargainingConfig& cfg, Rng& rng);
Valuation sample_valuation(const BargainingConfig& cfg, Rng& rng);

// Two-player alternating-offers game. The state vector is
//   [accepted, t, C(n_items), V_0(n_items), V_1(n_items), last_offer, i_curr]
// and the terminal state is all -1.
class BargainingGame final : public StochasticGame, public ExactSearchSupport {
 public:
  explicit BargainingGame(BargainingConfig cfg = {});

  const BargainingConfig& config() const { return cfg_; }
  const OfferCodec& codec() const { return codec_; }

  int num_players() const override { return 2; }
  double discount() const override { return cfg_.discount; }
  int num_actions() const override { return codec_.num_actions(); }
  int state_size() const override { return 3 * cfg_.n_items + 4; }
  int observation_size() const override { return 2 * cfg_.n_items + 3; }
  int infostate_size() const override {
    return 2 * cfg_.n_items + 2 + cfg_.max_turns;
  }
  int max_episode_length() const override { return cfg_.max_turns + 1; }
  State terminal_state_vector() const override;
  int acting_player_from_vector(std::span<const double> state) const override;
  std::vector<double> encode_infostate(std::span<const double> observation,
                                       std::span<const ActionId> history,
                                       int player) const override;
  std::vector<double> action_features(ActionId action) const override;
  int action_feature_size() const override { return cfg_.n_items + 1; }
  std::string config_hash() const override;

  State initial_state(Rng& rng) const override;
  StepResult step(const State& state, ActionId action) const override;
  std::vector<ActionId> legal_actions(const State& state) const override;
  std::vector<double> observe(const State& state, int player) const override;
  bool is_terminal(const State& state) const override;

  State resample_private(const State& state, int player,
                         Rng& rng) const override;
  State root_from_infostate(std::span<const double> infostate, int player,
                            Rng& rng) const override;
  std::vector<ActionId> history_from_infostate(
      std::span<const double> infostate) const override;

  // Assembles a state vector from its parts.
  State make_state(int turn, const Pool& pool,
                   const std::vector<Valuation>& valuations, ActionId last_offer,
                   int current_player) const;
  Pool pool_of(const State& state) const;
  Valuation valuation_of(const State& state, int player) const;
  int turn_of(const State& state) const;
  ActionId last_offer_of(const State& state) const;

 private:
  BargainingConfig cfg_;
  OfferCodec codec_;
  std::vector<Pool> pools_;
};

}  // namespace opsro

#endif  // OPSRO_BARGAINING_HPP_
