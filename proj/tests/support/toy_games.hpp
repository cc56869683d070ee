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


#ifndef OPSRO_TESTS_SUPPORT_TOY_GAMES_HPP_
#define OPSRO_TESTS_SUPPORT_TOY_GAMES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "opsro/common.hpp"
#include "opsro/dynamics_model.hpp"
#include "opsro/game.hpp"
#include "opsro/normal_form.hpp"
#include "opsro/policy.hpp"

namespace opsro::testing {

// Perfect-information tree of fixed depth. The state vector is
// [t, a_0, ..., a_{D-1}] with unplayed slots at -1; the mover at depth t is
// movers[t]; the payoff function maps a full action history to rewards paid
// on the last step.
class TableTreeGame final : public StochasticGame, public ExactSearchSupport {
 public:
  using PayoffFn = std::function<std::vector<double>(const std::vector<ActionId>&)>;

  TableTreeGame(int num_actions, std::vector<int> movers, PayoffFn payoff,
                std::string name = "tree")
      : num_actions_(num_actions),
        movers_(std::move(movers)),
        payoff_(std::move(payoff)),
        name_(std::move(name)) {}

  int num_players() const override { return 2; }
  double discount() const override { return 0.99; }
  int num_actions() const override { return num_actions_; }
  int state_size() const override { return depth() + 1; }
  int observation_size() const override { return state_size(); }
  int infostate_size() const override { return state_size(); }
  int max_episode_length() const override { return depth(); }
  State terminal_state_vector() const override {
    return State(state_size(), -1.0);
  }
  int acting_player_from_vector(std::span<const double> s) const override {
    const int t = static_cast<int>(std::lround(s[0]));
    return t >= 0 && t < depth() ? movers_[t] : 0;
  }
  std::vector<double> encode_infostate(std::span<const double> observation,
                                       std::span<const ActionId>,
                                       int) const override {
    return {observation.begin(), observation.end()};
  }
  std::string config_hash() const override {
    return name_ + "/" + std::to_string(num_actions_) + "/" +
           std::to_string(depth());
  }

  State initial_state(Rng&) const override {
    State s(state_size(), -1.0);
    s[0] = 0.0;
    return s;
  }
  StepResult step(const State& state, ActionId action) const override {
    if (is_terminal(state)) throw std::logic_error("step on a terminal state");
    if (action < 0 || action >= num_actions_)
      throw IllegalActionError("action out of range", -1);
    const int t = static_cast<int>(std::lround(state[0]));
    StepResult r;
    r.rewards.assign(2, 0.0);
    State next = state;
    next[1 + t] = action;
    next[0] = t + 1;
    if (t + 1 == depth()) {
      r.rewards = payoff_(history_of(next));
      r.next_state = terminal_state_vector();
      r.done = true;
    } else {
      r.next_state = std::move(next);
    }
    return r;
  }
  std::vector<ActionId> legal_actions(const State& state) const override {
    if (is_terminal(state)) throw std::logic_error("terminal state");
    std::vector<ActionId> out(num_actions_);
    for (int a = 0; a < num_actions_; ++a) out[a] = a;
    return out;
  }
  std::vector<double> observe(const State& state, int) const override {
    return state;
  }

  State resample_private(const State& state, int, Rng&) const override {
    return state;
  }
  State root_from_infostate(std::span<const double>, int,
                            Rng& rng) const override {
    return initial_state(rng);
  }
  std::vector<ActionId> history_from_infostate(
      std::span<const double> infostate) const override {
    std::vector<ActionId> h;
    for (std::size_t k = 1; k < infostate.size(); ++k)
      if (infostate[k] >= 0.0) h.push_back(static_cast<ActionId>(infostate[k]));
    return h;
  }

  int depth() const { return static_cast<int>(movers_.size()); }

 private:
  static std::vector<ActionId> history_of(const State& s) {
    std::vector<ActionId> h;
    for (std::size_t k = 1; k < s.size(); ++k)
      if (s[k] >= 0.0) h.push_back(static_cast<ActionId>(s[k]));
    return h;
  }

  int num_actions_;
  std::vector<int> movers_;
  PayoffFn payoff_;
  std::string name_;
};

// Every action ends the episode with rewards (1, 0).
inline std::shared_ptr<TableTreeGame> one_step_game(int num_actions = 3) {
  return std::make_shared<TableTreeGame>(
      num_actions, std::vector<int>{0},
      [](const std::vector<ActionId>&) { return std::vector<double>{1.0, 0.0}; },
      "one_step");
}

// Two forced moves (one per player), rewards (2, -1).
inline std::shared_ptr<TableTreeGame> single_action_game() {
  return std::make_shared<TableTreeGame>(
      1, std::vector<int>{0, 1},
      [](const std::vector<ActionId>&) { return std::vector<double>{2.0, -1.0}; },
      "single_action");
}

// Player `first` moves, then the other player; 2 actions each. leaf[a][b]
// holds the rewards after actions a then b.
inline std::shared_ptr<TableTreeGame> two_step_tree(
    std::vector<std::vector<std::vector<double>>> leaf, int first = 0) {
  return std::make_shared<TableTreeGame>(
      2, std::vector<int>{first, 1 - first},
      [leaf](const std::vector<ActionId>& h) { return leaf[h[0]][h[1]]; },
      "two_step");
}

// One-player chain over positions 0..4. State [pos, t]; action 0 moves left,
// action 1 right (clamped); reward pos'/4. Episodes end after `length` steps.
class ChainMdp final : public StochasticGame {
 public:
  explicit ChainMdp(int length = 6, std::vector<int> starts = {0, 1, 2, 3, 4})
      : length_(length), starts_(std::move(starts)) {}

  int num_players() const override { return 1; }
  double discount() const override { return 0.99; }
  int num_actions() const override { return 2; }
  int state_size() const override { return 2; }
  int observation_size() const override { return 2; }
  int infostate_size() const override { return 2; }
  int max_episode_length() const override { return length_; }
  State terminal_state_vector() const override { return {-1.0, -1.0}; }
  int acting_player_from_vector(std::span<const double>) const override {
    return 0;
  }
  std::vector<double> encode_infostate(std::span<const double> observation,
                                       std::span<const ActionId>,
                                       int) const override {
    return {observation.begin(), observation.end()};
  }
  std::string config_hash() const override {
    return "chain/" + std::to_string(length_);
  }

  State initial_state(Rng& rng) const override {
    std::uniform_int_distribution<std::size_t> pick(0, starts_.size() - 1);
    return {static_cast<double>(starts_[pick(rng)]), 0.0};
  }
  static int next_position(int pos, ActionId a) {
    return std::clamp(pos + (a == 1 ? 1 : -1), 0, 4);
  }
  static double reward_for(int next_pos) { return next_pos / 4.0; }

  StepResult step(const State& state, ActionId action) const override {
    if (is_terminal(state)) throw std::logic_error("step on a terminal state");
    if (action < 0 || action > 1) throw IllegalActionError("bad action", -1);
    const int pos = static_cast<int>(std::lround(state[0]));
    const int t = static_cast<int>(std::lround(state[1]));
    const int next = next_position(pos, action);
    StepResult r;
    r.rewards = {reward_for(next)};
    if (t + 1 >= length_) {
      r.next_state = terminal_state_vector();
      r.done = true;
    } else {
      r.next_state = {static_cast<double>(next), static_cast<double>(t + 1)};
    }
    return r;
  }
  std::vector<ActionId> legal_actions(const State& state) const override {
    if (is_terminal(state)) throw std::logic_error("terminal state");
    return {0, 1};
  }
  std::vector<double> observe(const State& state, int) const override {
    return state;
  }

 private:
  int length_;
  std::vector<int> starts_;
};

// Plays `action` when legal, otherwise the lowest legal action.
class PreferredActionPolicy final : public Policy {
 public:
  explicit PreferredActionPolicy(ActionId action) : action_(action) {}
  std::vector<double> action_probabilities(std::span<const double>,
                                           const LegalMask& legal) const override {
    std::vector<double> p(legal.size(), 0.0);
    p[pick(legal)] = 1.0;
    return p;
  }
  ActionId act(std::span<const double>, const LegalMask& legal,
               Rng&) const override {
    return pick(legal);
  }
  bool deterministic() const override { return true; }
  std::string kind() const override { return "preferred"; }

 private:
  ActionId pick(const LegalMask& legal) const {
    if (action_ >= 0 && action_ < static_cast<int>(legal.size()) && legal[action_])
      return action_;
    for (int a = 0; a < static_cast<int>(legal.size()); ++a)
      if (legal[a]) return a;
    throw std::invalid_argument("no legal action");
  }
  ActionId action_;
};

// Returns a fixed (possibly illegal) action.
class RawActionPolicy final : public Policy {
 public:
  explicit RawActionPolicy(ActionId action) : action_(action) {}
  std::vector<double> action_probabilities(std::span<const double>,
                                           const LegalMask& legal) const override {
    std::vector<double> p(legal.size(), 0.0);
    if (action_ < static_cast<int>(p.size())) p[action_] = 1.0;
    return p;
  }
  ActionId act(std::span<const double>, const LegalMask&, Rng&) const override {
    return action_;
  }
  bool deterministic() const override { return true; }
  std::string kind() const override { return "raw"; }

 private:
  ActionId action_;
};

// Prisoner's dilemma with strategy 0 = cooperate.
inline NormalFormGame prisoners_dilemma(double t = 5, double r = 3, double p = 1,
                                        double s = 0) {
  return make_symmetric({{r, s}, {t, p}});
}

inline NormalFormGame rock_paper_scissors() {
  return make_symmetric({{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}});
}

// Random bimatrix with entries uniform in [-1, 1].
inline NormalFormGame random_bimatrix(int rows, int cols, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> a(rows, std::vector<double>(cols));
  std::vector<std::vector<double>> b(rows, std::vector<double>(cols));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      a[i][j] = u(rng);
      b[i][j] = u(rng);
    }
  return make_bimatrix(a, b);
}

// Random symmetric game: row-player matrix uniform in [-1, 1].
inline std::vector<std::vector<double>> random_matrix(int m, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::vector<double>> a(m, std::vector<double>(m));
  for (auto& row : a)
    for (auto& v : row) v = u(rng);
  return a;
}

// Symmetric game in which strategy `d` strictly dominates every other one.
inline std::vector<std::vector<double>> dominant_matrix(int m, int d, Rng& rng) {
  auto a = random_matrix(m, rng);
  for (int j = 0; j < m; ++j) {
    double best = -1e9;
    for (int i = 0; i < m; ++i)
      if (i != d) best = std::max(best, a[i][j]);
    a[d][j] = best + 0.5;
  }
  return a;
}

inline MixedStrategy random_simplex(int m, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  MixedStrategy s;
  double total = 0.0;
  for (int k = 0; k < m; ++k) {
    s.weights.push_back(e(rng));
    total += s.weights.back();
  }
  for (auto& w : s.weights) w /= total;
  return s;
}

// Constant-output member network: zero weights, bias = `values`.
inline nn::Mlp constant_mlp(int inputs, const std::vector<double>& values) {
  Rng rng(1);
  nn::Mlp net({inputs, 1, 1, static_cast<int>(values.size())}, rng);
  for (auto& w : net.weights()) w.setZero();
  for (auto& b : net.biases()) b.setZero();
  for (std::size_t k = 0; k < values.size(); ++k)
    net.biases().back()[static_cast<Eigen::Index>(k)] = static_cast<float>(values[k]);
  return net;
}

inline NormStats identity_norm(int size) {
  return {std::vector<double>(size, 0.0), std::vector<double>(size, 1.0)};
}

// Ensemble whose member j always predicts rewards member_rewards[j] and state
// delta `delta`, with identity normalization. The observation network returns
// zeros and marks every action legal.
inline std::shared_ptr<const Ensemble> constant_ensemble(
    std::shared_ptr<const GameSchema> schema,
    const std::vector<std::vector<double>>& member_rewards,
    const std::vector<double>& delta, EnsembleConfig cfg = {}) {
  const int in = schema->state_size() + schema->action_feature_size();
  EnsembleNorms norms{identity_norm(schema->state_size()),
                      identity_norm(schema->action_feature_size()),
                      identity_norm(schema->state_size()),
                      identity_norm(schema->num_players()),
                      identity_norm(schema->observation_size())};
  std::vector<EnsembleMember> members;
  for (const auto& r : member_rewards)
    members.push_back({constant_mlp(in, delta), constant_mlp(in, r)});
  std::vector<double> obs(schema->observation_size(), 0.0);
  obs.resize(obs.size() + schema->num_actions(), 1.0);
  SharedObsNet net{constant_mlp(schema->state_size() + schema->num_players(), obs)};
  cfg.ensemble_size = static_cast<int>(member_rewards.size());
  return std::make_shared<const Ensemble>(std::move(schema), cfg, norms,
                                          std::move(members), std::move(net));
}

}  // namespace opsro::testing

#endif  // OPSRO_TESTS_SUPPORT_TOY_GAMES_HPP_
