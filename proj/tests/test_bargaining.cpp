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
#include <functional>
#include <map>
#include <set>
#include <memory>

#include "opsro/bargaining.hpp"
#include "opsro/trajectory.hpp"
#include "support/toy_games.hpp"

namespace opsro {
namespace {

// Independent enumeration of pools with every count >= 1 and the sum in
// [lo, hi].
std::vector<std::vector<int>> enumerate_pools(int n, int lo, int hi) {
  std::vector<std::vector<int>> out;
  std::vector<int> c(n, 1);
  std::function<void(int, int)> rec = [&](int j, int sum) {
    if (j == n) {
      if (sum >= lo && sum <= hi) out.push_back(c);
      return;
    }
    for (int v = 1; sum + v <= hi; ++v) {
      c[j] = v;
      rec(j + 1, sum + v);
    }
  };
  rec(0, 0);
  return out;
}

TEST(BargainingConfig, Validation) {
  BargainingConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.valuation_min = 2.0;  // below n_items
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.pool_min = 2;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.max_turns = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.discount = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(SamplePool, DefaultsAreFeasible) {
  const BargainingConfig cfg;
  Rng rng(1);
  for (int k = 0; k < 1000; ++k) {
    const Pool p = sample_pool(cfg, rng);
    int sum = 0;
    for (int c : p.counts) {
      EXPECT_GE(c, 1);
      sum += c;
    }
    EXPECT_GE(sum, 5);
    EXPECT_LE(sum, 7);
  }
}

TEST(SamplePool, UniqueFeasiblePool) {
  BargainingConfig cfg;
  cfg.pool_min = cfg.pool_max = 3;
  Rng rng(2);
  for (int k = 0; k < 50; ++k)
    EXPECT_EQ(sample_pool(cfg, rng).counts, (std::vector<int>{1, 1, 1}));
}

TEST(SamplePool, FeasibleSetMatchesEnumerationOracle) {
  const BargainingConfig cfg;
  const auto pools = feasible_pools(cfg);
  const auto oracle = enumerate_pools(3, 5, 7);
  ASSERT_EQ(pools.size(), 31u);
  ASSERT_EQ(oracle.size(), 31u);
  std::set<std::vector<int>> a, b(oracle.begin(), oracle.end());
  for (const auto& p : pools) a.insert(p.counts);
  EXPECT_EQ(a, b);
}

TEST(SamplePool, EmpiricalFrequenciesUniform) {
  const BargainingConfig cfg;
  Rng rng(12345);
  const int n = 100000;
  std::map<std::vector<int>, int> counts;
  for (int k = 0; k < n; ++k) ++counts[sample_pool(cfg, rng).counts];
  ASSERT_EQ(counts.size(), 31u);
  const double p = 1.0 / 31.0;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (const auto& [pool, c] : counts) EXPECT_LE(std::abs(c - n * p), 3 * sigma);
}

TEST(SampleValuations, DefaultsSatisfyBounds) {
  const BargainingConfig cfg;
  Rng rng(4);
  for (int k = 0; k < 1000; ++k) {
    const auto vs = sample_valuations(cfg, rng);
    ASSERT_EQ(vs.size(), 2u);
    for (const auto& v : vs) {
      double sum = 0.0;
      for (double x : v.values) {
        EXPECT_GE(x, 1.0);
        sum += x;
      }
      EXPECT_GE(sum, 5.0);
      EXPECT_LE(sum, 10.0);
    }
  }
}

TEST(SampleValuations, DegenerateRegionIsAllOnes) {
  BargainingConfig cfg;
  cfg.valuation_min = cfg.valuation_max = 3.0;
  Rng rng(5);
  for (int k = 0; k < 20; ++k)
    for (const auto& v : sample_valuations(cfg, rng))
      for (double x : v.values) EXPECT_NEAR(x, 1.0, 1e-12);
}

TEST(SampleValuations, MarginalsExchangeable) {
  const BargainingConfig cfg;
  Rng rng(6);
  const int n = 100000;
  std::vector<double> sum(3, 0.0), sq(3, 0.0);
  for (int k = 0; k < n; ++k) {
    const Valuation v = sample_valuation(cfg, rng);
    for (int j = 0; j < 3; ++j) {
      sum[j] += v.values[j];
      sq[j] += v.values[j] * v.values[j];
    }
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      const double ma = sum[a] / n, mb = sum[b] / n;
      const double va = sq[a] / n - ma * ma, vb = sq[b] / n - mb * mb;
      const double se = std::sqrt(va / n + vb / n);
      EXPECT_LE(std::abs(ma - mb), 3 * se);
    }
}

class BargainingStep : public ::testing::Test {
 protected:
  BargainingGame game;
  Pool pool{{2, 2, 1}};
  std::vector<Valuation> vals{{{2, 2, 3}}, {{2, 3, 2}}};  // offerer 0, accepter 1
  ActionId full_pool() const {
    const std::vector<int> offer = {2, 2, 1};
    return game.codec().index(offer);
  }
};

TEST_F(BargainingStep, AcceptAtTurnOne) {
  const State s = game.make_state(1, pool, vals, full_pool(), 1);
  const auto r = game.step(s, game.codec().accept_action());
  EXPECT_TRUE(r.done);
  EXPECT_NEAR(r.rewards[1], 0.99 * 12.0, 1e-12);
  EXPECT_NEAR(r.rewards[1], 11.88, 1e-12);
  EXPECT_NEAR(r.rewards[0], 0.0, 1e-12);
  EXPECT_EQ(r.next_state, game.terminal_state_vector());
}

TEST_F(BargainingStep, AcceptAtTurnTwo) {
  const State s = game.make_state(2, pool, vals, full_pool(), 1);
  const auto r = game.step(s, game.codec().accept_action());
  EXPECT_NEAR(r.rewards[1], 11.7612, 1e-12);
}

TEST_F(BargainingStep, OfferAdvancesTurn) {
  const State s = game.make_state(0, pool, vals, -1, 0);
  const auto r = game.step(s, full_pool());
  EXPECT_FALSE(r.done);
  EXPECT_EQ(r.rewards, (std::vector<double>{0.0, 0.0}));
  EXPECT_EQ(game.turn_of(r.next_state), 1);
  EXPECT_EQ(game.acting_player(r.next_state), 1);
  EXPECT_EQ(game.last_offer_of(r.next_state), full_pool());
}

TEST_F(BargainingStep, IllegalAndTerminalErrors) {
  const State s = game.make_state(0, pool, vals, -1, 0);
  EXPECT_THROW(game.step(s, game.codec().accept_action()), IllegalActionError);
  const std::vector<int> too_many = {3, 0, 0};
  EXPECT_THROW(game.step(s, game.codec().index(too_many)), IllegalActionError);
  EXPECT_THROW(game.step(game.terminal_state_vector(), 0), std::logic_error);
  EXPECT_THROW(game.legal_actions(game.terminal_state_vector()), std::logic_error);
}

TEST_F(BargainingStep, LegalActionCounts) {
  const Pool ones{{1, 1, 1}};
  const State first = game.make_state(0, ones, vals, -1, 0);
  const auto a = game.legal_actions(first);
  EXPECT_EQ(a.size(), 8u);
  EXPECT_EQ(std::count(a.begin(), a.end(), game.codec().accept_action()), 0);
  const State later = game.make_state(1, pool, vals, 0, 1);
  const auto b = game.legal_actions(later);
  EXPECT_EQ(b.size(), 19u);
  EXPECT_EQ(std::count(b.begin(), b.end(), game.codec().accept_action()), 1);
}

TEST(Bargaining, TurnLimitPaysNothing) {
  const BargainingGame game;
  const PolicyPtr never = std::make_shared<testing::PreferredActionPolicy>(0);
  const std::vector<PolicyPtr> joint{never, never};
  Rng rng(8);
  const auto t = rollout(game, joint, rng, game.max_episode_length());
  EXPECT_TRUE(t.terminated);
  EXPECT_EQ(static_cast<int>(t.steps.size()), game.config().max_turns + 1);
  EXPECT_EQ(t.episode_return, (std::vector<double>{0.0, 0.0}));
}

TEST(Bargaining, InfostateLayout) {
  const BargainingGame game;
  const int n = 3, T = game.config().max_turns;
  const Pool pool{{2, 2, 1}};
  const std::vector<Valuation> vals{{{2, 2, 3}}, {{2, 3, 2}}};
  const State s0 = game.make_state(0, pool, vals, -1, 0);
  const auto h0 = game.encode_infostate(game.observe(s0, 0), {}, 0);
  ASSERT_EQ(static_cast<int>(h0.size()), game.infostate_size());
  const std::vector<double> want0 = {0, 0, 2, 2, 1, 2, 2, 3};
  for (int d = 0; d < 2 + 2 * n; ++d) EXPECT_EQ(h0[d], want0[d]);
  for (int k = 0; k < T; ++k) EXPECT_EQ(h0[2 + 2 * n + k], -1.0);

  const std::vector<int> one = {1, 0, 1};
  const ActionId k = game.codec().index(one);
  const State s1 = game.step(s0, k).next_state;
  const std::vector<ActionId> hist = {k};
  const auto h1 = game.encode_infostate(game.observe(s1, 1), hist, 1);
  EXPECT_EQ(h1[2 + 2 * n], k);
  for (int j = 1; j < T; ++j) EXPECT_EQ(h1[2 + 2 * n + j], -1.0);

  // Opponent valuation is invisible.
  const std::vector<Valuation> other{{{1, 1, 8}}, {{2, 3, 2}}};
  const State s1b = game.make_state(1, pool, other, k, 1);
  EXPECT_EQ(game.encode_infostate(game.observe(s1b, 1), hist, 1), h1);

  const std::vector<ActionId> too_long(T + 1, 0);
  EXPECT_THROW(game.encode_infostate(game.observe(s0, 0), too_long, 0),
               std::invalid_argument);
}

TEST(BargainingProperty, RandomEpisodes) {
  const BargainingGame game;
  const PolicyPtr u = std::make_shared<UniformRandomPolicy>();
  const std::vector<PolicyPtr> joint{u, u};
  Rng rng(31);
  const State terminal = game.terminal_state_vector();
  for (int e = 0; e < 10000; ++e) {
    const auto t = rollout(game, joint, rng, game.max_episode_length());
    ASSERT_LE(static_cast<int>(t.steps.size()), game.config().max_turns + 1);
    ASSERT_TRUE(t.terminated);
    for (std::size_t k = 0; k < t.steps.size(); ++k) {
      ASSERT_NE(t.steps[k].state, terminal);
      if (k + 1 < t.steps.size()) {
        ASSERT_EQ(t.steps[k].rewards, (std::vector<double>{0.0, 0.0}));
      }
    }
    const auto& last = t.steps.back();
    if (last.action == game.codec().accept_action()) {
      const Pool pool = game.pool_of(last.state);
      const auto share = game.codec().offer(game.last_offer_of(last.state));
      const int acc = last.acting_player;
      double v_acc = 0.0, v_off = 0.0;
      for (int j = 0; j < 3; ++j) {
        ASSERT_LE(share[j], pool.counts[j]);
        ASSERT_GE(pool.counts[j] - share[j], 0);
        v_acc += game.valuation_of(last.state, acc).values[j] * share[j];
        v_off += game.valuation_of(last.state, 1 - acc).values[j] *
                 (pool.counts[j] - share[j]);
      }
      const double g = std::pow(0.99, game.turn_of(last.state));
      ASSERT_NEAR(last.rewards[acc], g * v_acc, 1e-9);
      ASSERT_NEAR(last.rewards[1 - acc], g * v_off, 1e-9);
    }
  }
}

TEST(BargainingProperty, FirstMoverCoinFlip) {
  const BargainingGame game;
  Rng rng(77);
  const int n = 100000;
  int zero = 0;
  for (int k = 0; k < n; ++k) zero += game.acting_player(game.initial_state(rng)) == 0;
  EXPECT_LE(std::abs(zero - n * 0.5), 3 * std::sqrt(n * 0.25));
}

TEST(BargainingProperty, CodecRoundTrip) {
  for (const auto& cfg : {BargainingConfig{}, BargainingConfig::mini()}) {
    const OfferCodec codec(cfg);
    for (ActionId a = 0; a < codec.num_offers(); ++a) {
      const auto offer = codec.offer(a);
      EXPECT_EQ(codec.index(offer), a);
    }
    EXPECT_EQ(codec.accept_action(), codec.num_actions() - 1);
  }
}

TEST(Bargaining, MiniPreset) {
  const auto cfg = BargainingConfig::mini();
  EXPECT_EQ(cfg.n_items, 2);
  EXPECT_EQ(cfg.pool_min, 2);
  EXPECT_EQ(cfg.pool_max, 3);
  EXPECT_EQ(cfg.max_turns, 4);
  EXPECT_NE(BargainingGame(cfg).config_hash(), BargainingGame().config_hash());
}

}  // namespace
}  // namespace opsro
