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

#ifndef OPSRO_RESPONSE_ORACLE_HPP_
#define OPSRO_RESPONSE_ORACLE_HPP_

#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "opsro/game.hpp"
#include "opsro/nn.hpp"
#include "opsro/normal_form.hpp"
#include "opsro/policy.hpp"

namespace opsro {

struct DdqnConfig {
  int hidden_width = 200;
  int depth = 2;
  int replay_capacity = 50000;
  int batch_size = 64;
  double learning_rate = 1e-4;
  int target_update_every = 1000;
  int learn_every = 2;
  double discount = 0.99;
  int min_buffer = 50000;
  double eps_start = 1.0;
  double eps_end = 0.02;
  int eps_decay_steps = 200000;
  int training_steps = 200000;
  nn::OptimizerKind optimizer = nn::OptimizerKind::kAdam;

  void validate() const;
  std::string canonical_string() const;
};

enum class ObjectiveMode { kPlain, kConservative, kCoverageAugmented };

ObjectiveMode parse_objective_mode(const std::string& name);
std::string objective_mode_name(ObjectiveMode mode);

struct ObjectiveConfig {
  double penalty_weight = 0.0;   // lambda
  double coverage_weight = 0.0;  // alpha for the current iteration
  int anneal_steps = 10;
  ObjectiveMode mode = ObjectiveMode::kCoverageAugmented;

  void validate() const;
  // Weights actually in force for `mode` (plain ignores both, conservative
  // ignores the coverage weight).
  double effective_penalty() const;
  double effective_coverage() const;
};

// max(0, alpha_init * (anneal_steps - iteration) / anneal_steps).
double anneal_alpha(double alpha_init, int anneal_steps, int iteration);

// Shaped per-step learner reward. Regular episodes: raw - lambda * rho.
// Coverage episodes: -lambda * rho.
double episode_reward(double raw_reward, double rho_value, double lambda,
                      bool coverage_episode);

// Greedy policy over a Q-network; ties go to the lowest action index.
class QPolicy final : public Policy {
 public:
  QPolicy(nn::Mlp network, std::string config_hash);

  std::vector<double> action_probabilities(
      std::span<const double> infostate, const LegalMask& legal) const override;
  ActionId act(std::span<const double> infostate, const LegalMask& legal,
               Rng& rng) const override;
  bool deterministic() const override { return true; }
  std::string kind() const override { return "q"; }

  ActionId greedy(std::span<const double> infostate,
                  const LegalMask& legal) const;
  const nn::Mlp& network() const { return network_; }
  const std::string& config_hash() const { return config_hash_; }

  nlohmann::json to_json() const;
  static std::shared_ptr<QPolicy> from_json(const nlohmann::json& j);

 private:
  nn::Mlp network_;
  std::string config_hash_;
};

struct ReplayTransition {
  std::vector<double> infostate;
  ActionId action = 0;
  double reward = 0.0;
  std::vector<double> next_infostate;
  LegalMask next_legal;
  bool done = false;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);
  void add(ReplayTransition t);
  std::size_t size() const { return items_.size(); }
  std::vector<const ReplayTransition*> sample(int batch_size, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<ReplayTransition> items_;
};

// Double-Q regression step: target r + discount * Q_target(s', argmax over
// legal a' of Q_online(s', a')), or r on terminal transitions. Applies one
// optimizer step to `online` through `trainer` and returns the squared TD loss.
double ddqn_update(std::span<const ReplayTransition* const> batch,
                   nn::Mlp& online, const nn::Mlp& target, double discount,
                   nn::Trainer& trainer);

// Double-Q targets for a batch (exposed for testing).
std::vector<double> ddqn_targets(std::span<const ReplayTransition* const> batch,
                                 const nn::Mlp& online, const nn::Mlp& target,
                                 double discount);

// Uncertainty penalty evaluated at a (state, action) pair.
using PenaltyFn = std::function<double(std::span<const double>, ActionId)>;

struct BestResponseStats {
  int episodes = 0;
  int coverage_episodes = 0;
  int environment_steps = 0;
  std::vector<int> opponent_counts;  // regular episodes, per opponent index
  bool record_rewards = false;
  std::vector<double> learner_rewards;  // shaped
  std::vector<double> raw_rewards;      // model reward for the learner
  double last_loss = 0.0;
};

// Trains a DDQN best response inside `env`. Each episode is a coverage
// episode with probability alpha (uniform-random opponent, reward -lambda*rho)
// and otherwise a pure opponent drawn from `opponent_mix` (reward
// raw - lambda*rho).
std::shared_ptr<QPolicy> train_best_response(
    const StochasticGame& env, const PenaltyFn& penalty,
    std::span<const PolicyPtr> opponent_strategies,
    const MixedStrategy& opponent_mix, const ObjectiveConfig& objective,
    const DdqnConfig& ddqn, Rng& rng, BestResponseStats* stats = nullptr);

}  // namespace opsro

#endif  // OPSRO_RESPONSE_ORACLE_HPP_
