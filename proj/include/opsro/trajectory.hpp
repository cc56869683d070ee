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

#ifndef OPSRO_TRAJECTORY_HPP_
#define OPSRO_TRAJECTORY_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "opsro/common.hpp"
#include "opsro/game.hpp"
#include "opsro/policy.hpp"

namespace opsro {

struct TrajectoryStep {
  State state;
  std::vector<double> observation;  // acting player's observation
  ActionId action = 0;
  std::vector<double> rewards;  // all players
  int acting_player = 0;
  LegalMask legal_mask;

  bool operator==(const TrajectoryStep&) const = default;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  std::vector<double> episode_return;
  // True when the last step reached a terminal state; false when the episode
  // was cut by a step limit.
  bool terminated = false;
  State final_state;

  // Per-player sum of step rewards.
  std::vector<double> summed_rewards(int num_players) const;
  bool operator==(const Trajectory&) const = default;
};

struct DatasetMetadata {
  std::string behavior_policy_tag;
  std::uint64_t seed = 0;
  std::string game_config_hash;

  bool operator==(const DatasetMetadata&) const = default;
};

struct Dataset {
  std::vector<Trajectory> trajectories;
  DatasetMetadata metadata;

  std::size_t num_steps() const;
  bool operator==(const Dataset&) const = default;
};

// Plays one episode. `joint[i]` acts whenever player i is to move. Stops at a
// terminal state or after `max_steps` steps.
Trajectory rollout(const StochasticGame& game, std::span<const PolicyPtr> joint,
                   Rng& rng, int max_steps);

// Appends `count` episodes of `joint` play.
Dataset generate_dataset(const StochasticGame& game,
                         std::span<const PolicyPtr> joint, int count,
                         std::uint64_t seed, const std::string& behavior_tag);

// True iff some step of `dataset` took `action` in a state within `tol`
// (max-absolute difference) of `state`.
bool is_covered(const Dataset& dataset, std::span<const double> state,
                ActionId action, double tol);

// Fraction of probe steps whose (state, action) is covered by `dataset`.
double coverage_fraction(const Dataset& dataset, const Trajectory& probe,
                         double tol);

}  // namespace opsro

#endif  // OPSRO_TRAJECTORY_HPP_
