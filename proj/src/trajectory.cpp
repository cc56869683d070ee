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

#include "opsro/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace opsro {

std::vector<double> Trajectory::summed_rewards(int num_players) const {
  std::vector<double> total(num_players, 0.0);
  for (const auto& step : steps)
    for (int i = 0; i < num_players; ++i) total[i] += step.rewards.at(i);
  return total;
}

std::size_t Dataset::num_steps() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.steps.size();
  return n;
}

Trajectory rollout(const StochasticGame& game, std::span<const PolicyPtr> joint,
                   Rng& rng, int max_steps) {
  const int n = game.num_players();
  if (static_cast<int>(joint.size()) != n)
    throw std::invalid_argument("rollout: joint policy size != num_players");
  if (max_steps < 1) throw std::invalid_argument("rollout: max_steps < 1");

  Trajectory traj;
  traj.episode_return.assign(n, 0.0);
  State state = game.initial_state(rng);
  std::vector<ActionId> history;
  while (static_cast<int>(traj.steps.size()) < max_steps) {
    TrajectoryStep step;
    step.acting_player = game.acting_player(state);
    step.legal_mask = game.legal_mask(state);
    step.observation = game.observe(state, step.acting_player);
    const auto infostate =
        game.encode_infostate(step.observation, history, step.acting_player);
    step.action =
        joint[step.acting_player]->act(infostate, step.legal_mask, rng);
    const int index = static_cast<int>(traj.steps.size());
    if (step.action < 0 ||
        step.action >= static_cast<int>(step.legal_mask.size()) ||
        !step.legal_mask[step.action]) {
      throw IllegalActionError("policy of player " +
                                   std::to_string(step.acting_player) +
                                   " chose illegal action " +
                                   std::to_string(step.action) + " at step " +
                                   std::to_string(index),
                               index);
    }
    StepResult result = game.step(state, step.action);
    step.state = std::move(state);
    step.rewards = result.rewards;
    for (int i = 0; i < n; ++i) traj.episode_return[i] += result.rewards[i];
    history.push_back(step.action);
    traj.steps.push_back(std::move(step));
    state = std::move(result.next_state);
    if (result.done) {
      traj.terminated = true;
      break;
    }
  }
  traj.final_state = std::move(state);
  return traj;
}

Dataset generate_dataset(const StochasticGame& game,
                         std::span<const PolicyPtr> joint, int count,
                         std::uint64_t seed, const std::string& behavior_tag) {
  if (count < 1) throw std::invalid_argument("dataset size must be >= 1");
  Dataset data;
  data.metadata = {behavior_tag, seed, game.config_hash()};
  Rng rng(seed);
  data.trajectories.reserve(count);
  for (int k = 0; k < count; ++k)
    data.trajectories.push_back(
        rollout(game, joint, rng, game.max_episode_length()));
  return data;
}

bool is_covered(const Dataset& dataset, std::span<const double> state,
                ActionId action, double tol) {
  if (tol < 0.0) throw std::invalid_argument("is_covered: tol < 0");
  for (const auto& traj : dataset.trajectories) {
    for (const auto& step : traj.steps) {
      if (step.action != action || step.state.size() != state.size()) continue;
      bool close = true;
      for (std::size_t d = 0; d < state.size() && close; ++d)
        close = std::fabs(step.state[d] - state[d]) <= tol;
      if (close) return true;
    }
  }
  return false;
}

double coverage_fraction(const Dataset& dataset, const Trajectory& probe,
                         double tol) {
  if (probe.steps.empty())
    throw std::invalid_argument("coverage_fraction: empty probe");
  std::size_t covered = 0;
  for (const auto& step : probe.steps)
    if (is_covered(dataset, step.state, step.action, tol)) ++covered;
  return static_cast<double>(covered) / probe.steps.size();
}

}  // namespace opsro
