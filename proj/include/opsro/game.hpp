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

#ifndef OPSRO_GAME_HPP_
#define OPSRO_GAME_HPP_

#include <span>
#include <string>
#include <vector>

#include "opsro/common.hpp"

namespace opsro {

// States of every game in this library are flat real vectors. The true games
// encode their full state in the vector; learned models predict it.
using State = std::vector<double>;

struct StepResult {
  State next_state;
  std::vector<double> rewards;  // one entry per player
  bool done = false;
};

// Layout-level description of a game: everything a learned model needs to
// stand in for the real dynamics (sizes, terminal vector, acting-player slot,
// information-state encoder).
class GameSchema {
 public:
  virtual ~GameSchema() = default;

  virtual int num_players() const = 0;
  virtual double discount() const = 0;
  virtual int num_actions() const = 0;
  virtual int state_size() const = 0;
  virtual int observation_size() const = 0;
  virtual int infostate_size() const = 0;
  virtual int max_episode_length() const = 0;

  virtual State terminal_state_vector() const = 0;

  // Acting player read back from a (possibly predicted) state vector.
  virtual int acting_player_from_vector(std::span<const double> state) const = 0;

  // Condenses the player's current observation and the public action history
  // into a fixed-length information state.
  virtual std::vector<double> encode_infostate(
      std::span<const double> observation,
      std::span<const ActionId> action_history, int player) const = 0;

  // Input features for an action when fed to a function approximator.
  // Defaults to a one-hot vector over the action space.
  virtual std::vector<double> action_features(ActionId action) const;
  virtual int action_feature_size() const { return num_actions(); }

  // Stable identifier of the game configuration.
  virtual std::string config_hash() const = 0;
};

// Turn-based stochastic game.
class StochasticGame : public GameSchema {
 public:
  virtual State initial_state(Rng& rng) const = 0;

  // Throws std::logic_error on a terminal state and IllegalActionError on an
  // illegal action.
  virtual StepResult step(const State& state, ActionId action) const = 0;
  virtual std::vector<ActionId> legal_actions(const State& state) const = 0;
  virtual std::vector<double> observe(const State& state, int player) const = 0;
  virtual int acting_player(const State& state) const {
    return acting_player_from_vector(state);
  }
  virtual bool is_terminal(const State& state) const;

  LegalMask legal_mask(const State& state) const {
    return mask_from_actions(legal_actions(state), num_actions());
  }
};

// Hooks for exact backward-induction search in games whose only chance event
// is the initial deal and whose transitions are deterministic afterwards.
class ExactSearchSupport {
 public:
  virtual ~ExactSearchSupport() = default;

  // Copy of `state` with `player`'s private information redrawn from its prior.
  virtual State resample_private(const State& state, int player,
                                 Rng& rng) const = 0;

  // A root state consistent with `player`'s information state; the other
  // players' private information is drawn from the prior.
  virtual State root_from_infostate(std::span<const double> infostate,
                                    int player, Rng& rng) const = 0;

  // Public action history recorded in an information state.
  virtual std::vector<ActionId> history_from_infostate(
      std::span<const double> infostate) const = 0;
};

}  // namespace opsro

#endif  // OPSRO_GAME_HPP_
