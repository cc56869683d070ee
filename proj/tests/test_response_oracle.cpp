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


#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "opsro/policy.hpp"
#include "opsro/response_oracle.hpp"
#include "support/toy_games.hpp"

namespace opsro {
namespace {

using testing::TableTreeGame;

DdqnConfig small_ddqn(int steps) {
  DdqnConfig c;
  c.hidden_width = 16;
  c.depth = 1;
  c.replay_capacity = 2000;
  c.batch_size = 16;
  c.learning_rate = 1e-3;
  c.target_update_every = 50;
  c.min_buffer = 32;
  c.eps_decay_steps = std::max(1, steps / 2);
  c.training_steps = steps;
  return c;
}

std::vector<PolicyPtr> fixed_opponents(int count) {
  std::vector<PolicyPtr> out;
  for (int k = 0; k < count; ++k)
    out.push_back(std::make_shared<testing::PreferredActionPolicy>(k));
  return out;
}

TEST(AnnealAlpha, Examples) {
  EXPECT_DOUBLE_EQ(anneal_alpha(0.5, 10, 0), 0.5);
  EXPECT_DOUBLE_EQ(anneal_alpha(0.5, 10, 5), 0.25);
  EXPECT_DOUBLE_EQ(anneal_alpha(0.5, 10, 10), 0.0);
  EXPECT_DOUBLE_EQ(anneal_alpha(0.5, 10, 25), 0.0);
  EXPECT_THROW(anneal_alpha(0.5, 0, 1), std::invalid_argument);
  EXPECT_THROW(anneal_alpha(0.5, 10, -1), std::invalid_argument);
}

TEST(AnnealAlpha, NonIncreasingAndZeroAfterHorizon) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const double a0 = uniform01(rng);
    const int steps = 1 + static_cast<int>(rng() % 20);
    double prev = anneal_alpha(a0, steps, 0);
    EXPECT_LE(prev, a0 + 1e-15);
    for (int s = 1; s < 3 * steps; ++s) {
      const double cur = anneal_alpha(a0, steps, s);
      EXPECT_LE(cur, prev + 1e-15);
      EXPECT_GE(cur, 0.0);
      if (s >= steps) EXPECT_EQ(cur, 0.0);
      prev = cur;
    }
  }
}

TEST(EpisodeReward, Examples) {
  EXPECT_DOUBLE_EQ(episode_reward(3.0, 0.5, 2.0, false), 2.0);
  EXPECT_DOUBLE_EQ(episode_reward(3.0, 0.5, 2.0, true), -1.0);
  EXPECT_DOUBLE_EQ(episode_reward(3.0, 0.5, 0.0, true), 0.0);
  EXPECT_THROW(episode_reward(1.0, 0.1, -1.0, false), std::invalid_argument);
}

TEST(EpisodeReward, ZeroPenaltyLeavesNormalEpisodesUnchanged) {
  Rng rng(12);
  for (int k = 0; k < 1000; ++k) {
    const double r = 20.0 * uniform01(rng) - 10.0;
    const double rho = 5.0 * uniform01(rng);
    EXPECT_EQ(episode_reward(r, rho, 0.0, false), r);
  }
}

TEST(ObjectiveConfig, ModeSelectsEffectiveWeights) {
  ObjectiveConfig c;
  c.penalty_weight = 4.0;
  c.coverage_weight = 0.2;
  c.mode = ObjectiveMode::kPlain;
  EXPECT_EQ(c.effective_penalty(), 0.0);
  EXPECT_EQ(c.effective_coverage(), 0.0);
  c.mode = ObjectiveMode::kConservative;
  EXPECT_EQ(c.effective_penalty(), 4.0);
  EXPECT_EQ(c.effective_coverage(), 0.0);
  c.mode = ObjectiveMode::kCoverageAugmented;
  EXPECT_EQ(c.effective_penalty(), 4.0);
  EXPECT_EQ(c.effective_coverage(), 0.2);
  for (auto m : {ObjectiveMode::kPlain, ObjectiveMode::kConservative,
                 ObjectiveMode::kCoverageAugmented})
    EXPECT_EQ(parse_objective_mode(objective_mode_name(m)), m);
}

TEST(QPolicy, GreedyRespectsLegalityAndBreaksTiesLow) {
  // Constant network: outputs (1, 5, 5, 2).
  Rng rng(1);
  nn::Mlp net({2, 1, 1, 4}, rng);
  for (auto& w : net.weights()) w.setZero();
  for (auto& b : net.biases()) b.setZero();
  net.biases().back() << 1.0f, 5.0f, 5.0f, 2.0f;
  QPolicy q(net, "h");
  const std::vector<double> info{0.3, -0.2};
  EXPECT_EQ(q.greedy(info, {true, true, true, true}), 1);
  EXPECT_EQ(q.greedy(info, {true, false, true, true}), 2);
  EXPECT_EQ(q.greedy(info, {true, false, false, true}), 3);
  EXPECT_EQ(q.greedy(info, {true, false, false, false}), 0);
  const auto p = q.action_probabilities(info, {true, false, true, true});
  EXPECT_EQ(p, (std::vector<double>{0.0, 0.0, 1.0, 0.0}));
  Rng r1(5), r2(999);
  EXPECT_EQ(q.act(info, {true, true, true, true}, r1),
            q.act(info, {true, true, true, true}, r2));
  EXPECT_TRUE(q.deterministic());

  const auto back = QPolicy::from_json(q.to_json());
  EXPECT_EQ(back->network(), q.network());
  EXPECT_EQ(back->config_hash(), "h");
}

TEST(ReplayBuffer, RingOverwritesOldest) {
  ReplayBuffer buf(3);
  for (int k = 0; k < 5; ++k) {
    ReplayTransition t;
    t.reward = k;
    t.done = true;
    buf.add(t);
  }
  EXPECT_EQ(buf.size(), 3u);
  Rng rng(2);
  std::vector<int> seen(5, 0);
  for (int k = 0; k < 200; ++k)
    for (const auto* t : buf.sample(4, rng)) ++seen[static_cast<int>(t->reward)];
  EXPECT_EQ(seen[0], 0);
  EXPECT_EQ(seen[1], 0);
  EXPECT_GT(seen[2], 0);
  EXPECT_GT(seen[3], 0);
  EXPECT_GT(seen[4], 0);
  EXPECT_THROW(ReplayBuffer(0), std::invalid_argument);
}

struct TargetFixture {
  Rng rng{21};
  nn::Mlp online{{3, 8, 1, 4}, rng};
  nn::Mlp target{{3, 8, 1, 4}, rng};
  std::vector<ReplayTransition> items;

  TargetFixture() {
    for (int k = 0; k < 40; ++k) {
      ReplayTransition t;
      t.infostate = {uniform01(rng), uniform01(rng), uniform01(rng)};
      t.action = static_cast<ActionId>(rng() % 4);
      t.reward = 2.0 * uniform01(rng) - 1.0;
      t.done = k % 3 == 0;
      if (!t.done) {
        t.next_infostate = {uniform01(rng), uniform01(rng), uniform01(rng)};
        t.next_legal.assign(4, false);
        for (int a = 0; a < 4; ++a) t.next_legal[a] = (rng() % 2) == 0;
        t.next_legal[rng() % 4] = true;
      }
      items.push_back(t);
    }
  }
  std::vector<const ReplayTransition*> batch() const {
    std::vector<const ReplayTransition*> out;
    for (const auto& t : items) out.push_back(&t);
    return out;
  }
};

// Double-Q target computed from single forward passes.
double double_q_oracle(const ReplayTransition& t, const nn::Mlp& online,
                       const nn::Mlp& target, double discount) {
  if (t.done) return t.reward;
  const auto qo = online.forward(t.next_infostate);
  const auto qt = target.forward(t.next_infostate);
  int best = -1;
  for (int a = 0; a < 4; ++a)
    if (t.next_legal[a] && (best < 0 || qo[a] > qo[best])) best = a;
  return t.reward + discount * qt[best];
}

TEST(DdqnTargets, MatchDoubleQOracle) {
  TargetFixture f;
  const auto batch = f.batch();
  const auto y = ddqn_targets(batch, f.online, f.target, 0.9);
  ASSERT_EQ(y.size(), batch.size());
  for (std::size_t c = 0; c < batch.size(); ++c) {
    EXPECT_NEAR(y[c], double_q_oracle(*batch[c], f.online, f.target, 0.9), 1e-5);
    if (batch[c]->done) EXPECT_EQ(y[c], batch[c]->reward);
  }
}

TEST(DdqnTargets, IdenticalNetsGiveMaxTarget) {
  TargetFixture f;
  const auto batch = f.batch();
  const auto y = ddqn_targets(batch, f.online, f.online, 0.95);
  for (std::size_t c = 0; c < batch.size(); ++c) {
    const auto& t = *batch[c];
    double expect = t.reward;
    if (!t.done) {
      const auto q = f.online.forward(t.next_infostate);
      double m = -1e300;
      for (int a = 0; a < 4; ++a)
        if (t.next_legal[a]) m = std::max(m, static_cast<double>(q[a]));
      expect += 0.95 * m;
    }
    EXPECT_NEAR(y[c], expect, 1e-5);
  }
  EXPECT_THROW(ddqn_targets({}, f.online, f.online, 0.9), std::invalid_argument);
}

TEST(DdqnUpdate, ReducesLossOnFixedTargets) {
  TargetFixture f;
  for (auto& t : f.items) t.done = true;
  const auto batch = f.batch();
  nn::Trainer trainer(f.online, {nn::OptimizerKind::kAdam, 1e-2});
  const double first = ddqn_update(batch, f.online, f.target, 0.9, trainer);
  double last = first;
  for (int k = 0; k < 300; ++k)
    last = ddqn_update(batch, f.online, f.target, 0.9, trainer);
  EXPECT_LT(last, 0.5 * first);
}

TEST(TrainBestResponse, RejectsEmptyOpponentSet) {
  auto game = testing::one_step_game();
  Rng rng(3);
  std::vector<PolicyPtr> none;
  EXPECT_THROW(train_best_response(*game, {}, none, MixedStrategy::uniform(1),
                                   {}, small_ddqn(10), rng, nullptr),
               std::invalid_argument);
  auto opp = fixed_opponents(2);
  EXPECT_THROW(train_best_response(*game, {}, opp, MixedStrategy::uniform(3),
                                   {}, small_ddqn(10), rng, nullptr),
               std::invalid_argument);
}

TEST(TrainBestResponse, NoPenaltyNoCoverageLogsRawRewards) {
  auto game = testing::two_step_tree(
      {{{1.0, -1.0}, {0.0, 2.0}}, {{3.0, 1.0}, {-2.0, 0.5}}});
  Rng rng(4);
  auto opp = fixed_opponents(2);
  ObjectiveConfig obj;
  obj.penalty_weight = 0.0;
  obj.coverage_weight = 0.0;
  BestResponseStats stats;
  stats.record_rewards = true;
  auto penalty = [](std::span<const double>, ActionId) { return 0.7; };
  train_best_response(*game, penalty, opp, MixedStrategy::uniform(2), obj,
                      small_ddqn(300), rng, &stats);
  ASSERT_FALSE(stats.learner_rewards.empty());
  EXPECT_EQ(stats.learner_rewards, stats.raw_rewards);
  EXPECT_EQ(stats.coverage_episodes, 0);
}

TEST(TrainBestResponse, FullCoverageEpisodesEarnOnlyPenalty) {
  auto game = testing::two_step_tree(
      {{{1.0, -1.0}, {0.0, 2.0}}, {{3.0, 1.0}, {-2.0, 0.5}}});
  Rng rng(5);
  auto opp = fixed_opponents(2);
  ObjectiveConfig obj;
  obj.penalty_weight = 4.0;
  obj.coverage_weight = 1.0;
  BestResponseStats stats;
  stats.record_rewards = true;
  auto penalty = [](std::span<const double>, ActionId) { return 0.25; };
  train_best_response(*game, penalty, opp, MixedStrategy::uniform(2), obj,
                      small_ddqn(200), rng, &stats);
  EXPECT_EQ(stats.coverage_episodes, stats.episodes);
  EXPECT_EQ(stats.opponent_counts, (std::vector<int>{0, 0}));
  for (double r : stats.learner_rewards) EXPECT_DOUBLE_EQ(r, -1.0);
}

TEST(TrainBestResponse, SingleActionGamePlaysThatAction) {
  auto game = testing::single_action_game();
  Rng rng(6);
  auto opp = fixed_opponents(1);
  auto br = train_best_response(*game, {}, opp, MixedStrategy::uniform(1), {},
                                small_ddqn(100), rng, nullptr);
  Rng r2(0);
  const State s = game->initial_state(r2);
  EXPECT_EQ(br->act(game->observe(s, 0), game->legal_mask(s), r2), 0);
}

TEST(TrainBestResponse, OpponentDrawsFollowMixture) {
  auto game = testing::one_step_game(2);
  Rng rng(7);
  auto opp = fixed_opponents(3);
  const MixedStrategy mix({0.2, 0.5, 0.3});
  BestResponseStats stats;
  auto cfg = small_ddqn(6000);
  cfg.learn_every = 1000;
  train_best_response(*game, {}, opp, mix, {}, cfg, rng, &stats);
  const double n = static_cast<double>(stats.episodes);
  ASSERT_GE(n, 5000.0);
  // Pearson goodness of fit, 2 degrees of freedom, false alarm rate 1e-3.
  double chi2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double expect = n * mix.weights[k];
    const double d = stats.opponent_counts[k] - expect;
    chi2 += d * d / expect;
  }
  EXPECT_LT(chi2, 13.816);
}

TEST(TrainBestResponse, MatchesValueIterationOnTwoStepChain) {
  // Player 0 moves twice. First action 0 leads to payoff 1 either way; first
  // action 1 leads to payoff 0 or 3 depending on the second action.
  auto game = std::make_shared<TableTreeGame>(
      2, std::vector<int>{0, 0},
      [](const std::vector<ActionId>& h) {
        const double v = h[0] == 0 ? 1.0 : (h[1] == 1 ? 3.0 : 0.0);
        return std::vector<double>{v, 0.0};
      },
      "chain2");
  auto opp = fixed_opponents(1);
  int agree = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(100 + seed);
    auto cfg = small_ddqn(4000);
    cfg.discount = 0.9;
    auto br = train_best_response(*game, {}, opp, MixedStrategy::uniform(1), {},
                                  cfg, rng, nullptr);
    // Value iteration: Q(root, 0) = 0.9, Q(root, 1) = 0.9 * 3 = 2.7.
    const std::vector<double> root{0.0, -1.0, -1.0};
    const std::vector<double> after1{1.0, 1.0, -1.0};
    const LegalMask all{true, true};
    const auto q = br->network().forward(root);
    const bool ok = br->greedy(root, all) == 1 && br->greedy(after1, all) == 1 &&
                    std::abs(q[1] - 2.7) < 0.3 && std::abs(q[0] - 0.9) < 0.3;
    if (ok) ++agree;
  }
  EXPECT_EQ(agree, 3);
}

TEST(TrainBestResponse, DeterministicForSeed) {
  auto game = testing::two_step_tree(
      {{{1.0, -1.0}, {0.0, 2.0}}, {{3.0, 1.0}, {-2.0, 0.5}}});
  auto opp = fixed_opponents(2);
  ObjectiveConfig obj;
  obj.penalty_weight = 1.0;
  obj.coverage_weight = 0.3;
  auto penalty = [](std::span<const double> s, ActionId a) { return 0.1 * s[0] + a; };
  Rng r1(8), r2(8);
  auto a = train_best_response(*game, penalty, opp, MixedStrategy::uniform(2),
                               obj, small_ddqn(400), r1, nullptr);
  auto b = train_best_response(*game, penalty, opp, MixedStrategy::uniform(2),
                               obj, small_ddqn(400), r2, nullptr);
  EXPECT_EQ(a->network(), b->network());
}

}  // namespace
}  // namespace opsro
