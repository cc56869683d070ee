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

#include "opsro/response_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace opsro {

void DdqnConfig::validate() const {
  if (hidden_width < 1 || depth < 1 || replay_capacity < 1 || batch_size < 1 ||
      target_update_every < 1 || learn_every < 1 || min_buffer < 1 ||
      eps_decay_steps < 1 || training_steps < 1)
    throw std::invalid_argument("ddqn: counts must be positive");
  if (!(learning_rate > 0.0) || !(discount > 0.0) || discount > 1.0)
    throw std::invalid_argument("ddqn: bad learning rate or discount");
  if (eps_start < eps_end || eps_end < 0.0 || eps_start > 1.0)
    throw std::invalid_argument("ddqn: need 1 >= eps_start >= eps_end >= 0");
}

std::string DdqnConfig::canonical_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "ddqn;width=" << hidden_width << ";depth=" << depth
     << ";replay=" << replay_capacity << ";batch=" << batch_size
     << ";lr=" << learning_rate << ";target=" << target_update_every
     << ";learn=" << learn_every << ";gamma=" << discount
     << ";min_buffer=" << min_buffer << ";eps=" << eps_start << ","
     << eps_end << "," << eps_decay_steps << ";steps=" << training_steps
     << ";opt=" << nn::optimizer_name(optimizer);
  return os.str();
}

ObjectiveMode parse_objective_mode(const std::string& name) {
  if (name == "plain") return ObjectiveMode::kPlain;
  if (name == "conservative") return ObjectiveMode::kConservative;
  if (name == "coverage_augmented") return ObjectiveMode::kCoverageAugmented;
  throw std::invalid_argument("unknown objective mode '" + name + "'");
}

std::string objective_mode_name(ObjectiveMode mode) {
  switch (mode) {
    case ObjectiveMode::kPlain: return "plain";
    case ObjectiveMode::kConservative: return "conservative";
    case ObjectiveMode::kCoverageAugmented: return "coverage_augmented";
  }
  return "?";
}

void ObjectiveConfig::validate() const {
  if (penalty_weight < 0.0)
    throw std::invalid_argument("objective: penalty weight < 0");
  if (coverage_weight < 0.0 || coverage_weight > 1.0)
    throw std::invalid_argument("objective: coverage weight outside [0, 1]");
  if (anneal_steps < 1)
    throw std::invalid_argument("objective: anneal_steps < 1");
}

double ObjectiveConfig::effective_penalty() const {
  return mode == ObjectiveMode::kPlain ? 0.0 : penalty_weight;
}

double ObjectiveConfig::effective_coverage() const {
  return mode == ObjectiveMode::kCoverageAugmented ? coverage_weight : 0.0;
}

double anneal_alpha(double alpha_init, int anneal_steps, int iteration) {
  if (anneal_steps < 1) throw std::invalid_argument("anneal_steps < 1");
  if (iteration < 0) throw std::invalid_argument("iteration < 0");
  return std::max(0.0, alpha_init * (anneal_steps - iteration) /
                           static_cast<double>(anneal_steps));
}

double episode_reward(double raw_reward, double rho_value, double lambda,
                      bool coverage_episode) {
  if (lambda < 0.0) throw std::invalid_argument("episode_reward: lambda < 0");
  const double penalty = lambda * rho_value;
  return coverage_episode ? -penalty : raw_reward - penalty;
}

QPolicy::QPolicy(nn::Mlp network, std::string config_hash)
    : network_(std::move(network)), config_hash_(std::move(config_hash)) {}

ActionId QPolicy::greedy(std::span<const double> infostate,
                         const LegalMask& legal) const {
  const nn::Vector q = network_.forward(infostate);
  ActionId best = -1;
  for (int a = 0; a < static_cast<int>(legal.size()); ++a) {
    if (!legal[a]) continue;
    if (best < 0 || q[a] > q[best]) best = a;
  }
  if (best < 0) throw std::invalid_argument("QPolicy: no legal actions");
  return best;
}

std::vector<double> QPolicy::action_probabilities(
    std::span<const double> infostate, const LegalMask& legal) const {
  std::vector<double> probs(legal.size(), 0.0);
  probs[greedy(infostate, legal)] = 1.0;
  return probs;
}

ActionId QPolicy::act(std::span<const double> infostate, const LegalMask& legal,
                      Rng&) const {
  return greedy(infostate, legal);
}

nlohmann::json QPolicy::to_json() const {
  return {{"kind", "q"},
          {"config_hash", config_hash_},
          {"network", network_.to_json()}};
}

std::shared_ptr<QPolicy> QPolicy::from_json(const nlohmann::json& j) {
  return std::make_shared<QPolicy>(nn::Mlp::from_json(j.at("network")),
                                   j.at("config_hash").get<std::string>());
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("replay capacity < 1");
  items_.reserve(std::min<std::size_t>(capacity_, 1u << 16));
}

void ReplayBuffer::add(ReplayTransition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const ReplayTransition*> ReplayBuffer::sample(int batch_size,
                                                          Rng& rng) const {
  if (items_.empty()) throw std::logic_error("sample from empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<const ReplayTransition*> out(batch_size);
  for (auto& p : out) p = &items_[pick(rng)];
  return out;
}

namespace {

nn::Matrix infostate_matrix(std::span<const ReplayTransition* const> batch,
                            bool next) {
  const auto& first = next ? batch[0]->next_infostate : batch[0]->infostate;
  nn::Matrix m(first.size(), batch.size());
  for (std::size_t c = 0; c < batch.size(); ++c) {
    const auto& v = next ? batch[c]->next_infostate : batch[c]->infostate;
    for (std::size_t r = 0; r < v.size(); ++r) m(r, c) = static_cast<float>(v[r]);
  }
  return m;
}

}  // namespace

std::vector<double> ddqn_targets(std::span<const ReplayTransition* const> batch,
                                 const nn::Mlp& online, const nn::Mlp& target,
                                 double discount) {
  if (batch.empty()) throw std::invalid_argument("ddqn: empty batch");
  std::vector<double> y(batch.size());
  // Terminal transitions carry no next infostate; bootstrap only the rest.
  std::vector<const ReplayTransition*> live;
  std::vector<std::size_t> live_index;
  for (std::size_t c = 0; c < batch.size(); ++c) {
    y[c] = batch[c]->reward;
    if (!batch[c]->done) {
      live.push_back(batch[c]);
      live_index.push_back(c);
    }
  }
  if (live.empty()) return y;
  const nn::Matrix next = infostate_matrix(live, true);
  const nn::Matrix q_online = online.forward(next);
  const nn::Matrix q_target = target.forward(next);
  for (std::size_t c = 0; c < live.size(); ++c) {
    const auto& legal = live[c]->next_legal;
    int best = -1;
    for (int a = 0; a < static_cast<int>(legal.size()); ++a)
      if (legal[a] && (best < 0 || q_online(a, c) > q_online(best, c))) best = a;
    if (best < 0) continue;
    y[live_index[c]] += discount * q_target(best, c);
  }
  return y;
}

double ddqn_update(std::span<const ReplayTransition* const> batch,
                   nn::Mlp& online, const nn::Mlp& target, double discount,
                   nn::Trainer& trainer) {
  const std::vector<double> y = ddqn_targets(batch, online, target, discount);
  const nn::Matrix x = infostate_matrix(batch, false);
  const float count = static_cast<float>(batch.size());
  return trainer.step(x, [&](const nn::Matrix& out, nn::Matrix& grad) {
    grad.setZero(out.rows(), out.cols());
    float loss = 0.0f;
    for (std::size_t c = 0; c < batch.size(); ++c) {
      const int a = batch[c]->action;
      const float err = out(a, c) - static_cast<float>(y[c]);
      loss += err * err;
      grad(a, c) = 2.0f * err / count;
    }
    return loss / count;
  });
}

std::shared_ptr<QPolicy> train_best_response(
    const StochasticGame& env, const PenaltyFn& penalty,
    std::span<const PolicyPtr> opponent_strategies,
    const MixedStrategy& opponent_mix, const ObjectiveConfig& objective,
    const DdqnConfig& ddqn, Rng& rng, BestResponseStats* stats) {
  objective.validate();
  ddqn.validate();
  if (opponent_strategies.empty())
    throw std::invalid_argument("train_best_response: no opponent strategies");
  if (opponent_mix.size() != static_cast<int>(opponent_strategies.size()) ||
      !opponent_mix.valid(1e-6))
    throw std::invalid_argument("train_best_response: bad opponent mixture");

  const int n = env.num_players();
  const double lambda = objective.effective_penalty();
  const double alpha = objective.effective_coverage();
  const int max_len = env.max_episode_length();

  nn::Mlp online({env.infostate_size(), ddqn.hidden_width, ddqn.depth,
                  env.num_actions()},
                 rng);
  nn::Mlp target = online;
  nn::Trainer trainer(online, {ddqn.optimizer, ddqn.learning_rate});
  ReplayBuffer buffer(ddqn.replay_capacity);
  const std::size_t min_buffer =
      std::min(ddqn.min_buffer, ddqn.replay_capacity);
  auto uniform = std::make_shared<UniformRandomPolicy>();

  BestResponseStats local;
  local.opponent_counts.assign(opponent_strategies.size(), 0);
  local.record_rewards = stats && stats->record_rewards;

  struct Pending {
    std::vector<double> infostate;
    ActionId action;
    double reward;
  };

  int env_steps = 0;
  while (env_steps < ddqn.training_steps) {
    const bool coverage = uniform01(rng) < alpha;
    const int learner =
        std::uniform_int_distribution<int>(0, n - 1)(rng);
    std::vector<PolicyPtr> seats(n);
    for (int p = 0; p < n; ++p) {
      if (p == learner) continue;
      if (coverage) {
        seats[p] = uniform;
      } else {
        const int k = sample_action(opponent_mix.weights, rng);
        seats[p] = opponent_strategies[k];
        ++local.opponent_counts[k];
      }
    }
    ++local.episodes;
    if (coverage) ++local.coverage_episodes;

    State state = env.initial_state(rng);
    std::vector<ActionId> history;
    std::optional<Pending> pending;
    for (int t = 0;; ++t) {
      const int player = env.acting_player(state);
      const LegalMask legal = env.legal_mask(state);
      const auto obs = env.observe(state, player);
      auto info = env.encode_infostate(obs, history, player);
      ActionId action;
      if (player == learner) {
        if (pending) {
          buffer.add({std::move(pending->infostate), pending->action,
                      pending->reward, info, legal, false});
        }
        const double frac =
            std::min(1.0, static_cast<double>(env_steps) / ddqn.eps_decay_steps);
        const double eps =
            ddqn.eps_start + (ddqn.eps_end - ddqn.eps_start) * frac;
        if (uniform01(rng) < eps) {
          action = uniform->act(info, legal, rng);
        } else {
          const nn::Vector q = online.forward(info);
          action = -1;
          for (int a = 0; a < static_cast<int>(legal.size()); ++a)
            if (legal[a] && (action < 0 || q[a] > q[action])) action = a;
        }
        pending = Pending{std::move(info), action, 0.0};
      } else {
        action = seats[player]->act(info, legal, rng);
        if (action < 0 || action >= static_cast<int>(legal.size()) ||
            !legal[action])
          throw IllegalActionError("opponent chose an illegal action", t);
      }

      const double rho_value =
          (lambda > 0.0 && penalty) ? penalty(state, action) : 0.0;
      StepResult result = env.step(state, action);
      const double raw = result.rewards[learner];
      const double shaped = episode_reward(raw, rho_value, lambda, coverage);
      if (pending) pending->reward += shaped;
      if (local.record_rewards) {
        local.learner_rewards.push_back(shaped);
        local.raw_rewards.push_back(raw);
      }
      history.push_back(action);
      ++env_steps;

      if (env_steps % ddqn.learn_every == 0 && buffer.size() >= min_buffer) {
        const auto batch = buffer.sample(ddqn.batch_size, rng);
        local.last_loss = ddqn_update(batch, online, target, ddqn.discount,
                                      trainer);
      }
      if (env_steps % ddqn.target_update_every == 0) target = online;

      state = std::move(result.next_state);
      const bool cut = t + 1 >= max_len;
      if (result.done || cut) {
        if (pending)
          buffer.add({std::move(pending->infostate), pending->action,
                      pending->reward, {}, {}, true});
        break;
      }
    }
  }
  local.environment_steps = env_steps;
  if (stats) *stats = std::move(local);
  return std::make_shared<QPolicy>(std::move(online), ddqn.canonical_string());
}

}  // namespace opsro
