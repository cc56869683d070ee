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

#include <memory>
#include <stdexcept>
#include <vector>

#include "opsro/bargaining.hpp"
#include "opsro/empirical_game.hpp"
#include "opsro/meta_solvers.hpp"
#include "support/toy_games.hpp"

namespace opsro {
namespace {

using testing::ChainMdp;

// Returns K member rows drawn from its own stream and counts its calls.
class StubEstimator final : public PayoffEstimator {
 public:
  explicit StubEstimator(int members) : members_(members) {}
  int num_members() const override { return members_; }
  int num_players() const override { return 2; }
  PayoffEntry estimate(std::span<const PolicyPtr>, int num_simulations,
                       Rng& rng, std::vector<double>*) const override {
    ++calls;
    std::vector<std::vector<double>> rows(members_, std::vector<double>(2));
    for (auto& row : rows)
      for (auto& x : row) x = 10.0 * uniform01(rng) - 5.0;
    return make_entry(std::move(rows), num_simulations);
  }
  mutable int calls = 0;

 private:
  int members_;
};

PolicyPtr pref(int a) { return std::make_shared<testing::PreferredActionPolicy>(a); }

// Chain ensemble whose member j pays scale[j] * (1 + action) per step.
std::shared_ptr<const ModelMdp> action_reward_model(std::vector<double> scale) {
  const auto chain = std::make_shared<const ChainMdp>();
  std::vector<std::vector<double>> zeros(scale.size(), {0.0});
  auto base = testing::constant_ensemble(chain, zeros, {0.3, 1.0});
  auto members = base->members();
  for (std::size_t j = 0; j < members.size(); ++j) {
    auto& r = members[j].reward;
    r.weights()[0].setZero();
    r.weights()[0](0, 2) = 1.0f;
    r.weights()[0](0, 3) = 2.0f;
    r.weights()[1](0, 0) = static_cast<float>(scale[j]);
  }
  auto e = std::make_shared<const Ensemble>(chain, base->config(), base->norms(),
                                            members, base->obs_net());
  return std::make_shared<const ModelMdp>(
      e, std::vector<State>{{0.0, 0.0}, {2.0, 0.0}});
}

TEST(EstimateEntry, IdenticalMembersCollapseBounds) {
  auto model = action_reward_model({1.5, 1.5, 1.5});
  Rng rng(1);
  const PolicyPtr u = std::make_shared<UniformRandomPolicy>();
  const std::vector<PolicyPtr> joint{u};
  const auto e = estimate_entry(*model, joint, 20, rng);
  ASSERT_EQ(e.per_member_utilities.size(), 3u);
  for (const auto& row : e.per_member_utilities)
    EXPECT_EQ(row, e.per_member_utilities[0]);
  EXPECT_EQ(e.lower(), e.upper());
  EXPECT_NEAR(e.lower()[0], e.mean_utilities[0], 1e-12);
  EXPECT_EQ(e.num_samples, 20);
}

TEST(EstimateEntry, MatchesResummationOracle) {
  auto model = action_reward_model({1.0, -2.0});
  const PolicyPtr u = std::make_shared<UniformRandomPolicy>();
  const std::vector<PolicyPtr> joint{u};
  for (int n : {1, 2, 7}) {
    Rng a(40 + n), b(40 + n);
    std::vector<double> rho;
    const auto e = estimate_entry(*model, joint, n, a, &rho);
    std::vector<double> sum(2, 0.0);
    for (int k = 0; k < n; ++k) {
      const auto r = model_rollout(*model, joint, b);
      for (int j = 0; j < 2; ++j) sum[j] += r.per_member_returns[j][0];
      if (n == 1) {
        EXPECT_EQ(e.per_member_utilities[0][0], r.per_member_returns[0][0]);
        EXPECT_EQ(e.per_member_utilities[1][0], r.per_member_returns[1][0]);
      }
    }
    for (int j = 0; j < 2; ++j)
      EXPECT_NEAR(e.per_member_utilities[j][0], sum[j] / n, 1e-12);
    EXPECT_NEAR(e.mean_utilities[0],
                0.5 * (e.per_member_utilities[0][0] + e.per_member_utilities[1][0]),
                1e-9);
    EXPECT_EQ(rho.size(), static_cast<std::size_t>(n));
  }
  Rng rng(0);
  EXPECT_THROW(estimate_entry(*model, joint, 0, rng), std::invalid_argument);
}

TEST(EmpiricalGameExtend, CountsNewProfilesOnly) {
  StubEstimator est(2);
  Rng rng(3);
  EmpiricalGame g(5);
  EXPECT_EQ(g.extend(pref(0), est, rng), 1);
  EXPECT_EQ(g.num_entries(), 1u);
  EXPECT_EQ(g.extend(pref(1), est, rng), 2);
  const auto e00 = g.entry(0, 0);
  const auto e01 = g.entry(0, 1);
  const auto e11 = g.entry(1, 1);
  est.calls = 0;
  EXPECT_EQ(g.extend(pref(2), est, rng), 3);
  EXPECT_EQ(est.calls, 3);
  EXPECT_EQ(g.num_entries(), 6u);
  EXPECT_TRUE(g.complete());
  EXPECT_EQ(g.entry(0, 0), e00);
  EXPECT_EQ(g.entry(0, 1), e01);
  EXPECT_EQ(g.entry(1, 1), e11);
  EXPECT_EQ(g.entry(2, 0).num_samples, 5);
}

TEST(EmpiricalGameExtend, DuplicatePolicyEstimatedIndependently) {
  StubEstimator est(2);
  Rng rng(4);
  EmpiricalGame g(3);
  const PolicyPtr p = pref(0);
  g.extend(p, est, rng);
  g.extend(p, est, rng);
  EXPECT_EQ(g.num_strategies(), 2);
  EXPECT_NE(g.entry(0, 0), g.entry(1, 1));
}

TEST(EmpiricalGameProperties, FullCoverageSymmetryAndOrdering) {
  for (int k_members : {1, 2, 5}) {
    StubEstimator est(k_members);
    Rng rng(50 + k_members);
    EmpiricalGame g(2);
    for (int m = 1; m <= 6; ++m) {
      g.extend(pref(m % 3), est, rng);
      EXPECT_EQ(g.num_entries(), static_cast<std::size_t>(m * (m + 1) / 2));
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          ASSERT_TRUE(g.has_entry(a, b));
          if (a != b) EXPECT_EQ(g.entry(b, a), g.entry(a, b).swapped());
        }
      const auto nfg = to_bounded_nfg(g);
      for (std::size_t k = 0; k < nfg.mean.num_profiles(); ++k) {
        const auto prof = nfg.mean.profile_at(k);
        for (int i = 0; i < 2; ++i) {
          EXPECT_LE(nfg.lower.payoff(prof, i), nfg.mean.payoff(prof, i) + 1e-12);
          EXPECT_LE(nfg.mean.payoff(prof, i), nfg.upper.payoff(prof, i) + 1e-12);
        }
      }
      EXPECT_TRUE(nfg.mean.is_symmetric(1e-12));
    }
  }
}

TEST(EmpiricalGameProperties, MeanRegretBoundedByWorstCase) {
  Rng rng(60);
  for (int trial = 0; trial < 100; ++trial) {
    StubEstimator est(3);
    EmpiricalGame g(1);
    for (int m = 0; m < 3; ++m) g.extend(pref(m), est, rng);
    const auto nfg = to_bounded_nfg(g);
    const auto sigma = testing::random_simplex(3, rng);
    const MixedStrategy joint[2] = {sigma, sigma};
    const auto r = regret(nfg.mean, joint);
    EXPECT_LE(r[0] + r[1], worst_case_regret(nfg, sigma) + 1e-9);
  }
}

TEST(ToBoundedNfg, HandExample) {
  EmpiricalGame g(1);
  g.add_strategy(pref(0));
  g.add_strategy(pref(1));
  g.set_entry(0, 0, make_entry({{1.0, 1.0}, {3.0, 3.0}}, 1));
  g.set_entry(0, 1, make_entry({{1.0, 4.0}, {3.0, 0.0}}, 1));
  EXPECT_THROW(to_bounded_nfg(g), std::logic_error);
  g.set_entry(1, 1, make_entry({{2.0, 2.0}, {2.0, 2.0}}, 1));
  const auto nfg = to_bounded_nfg(g);
  const int p01[2] = {0, 1};
  const int p10[2] = {1, 0};
  EXPECT_DOUBLE_EQ(nfg.lower.payoff(p01, 0), 1.0);
  EXPECT_DOUBLE_EQ(nfg.upper.payoff(p01, 0), 3.0);
  EXPECT_DOUBLE_EQ(nfg.mean.payoff(p01, 0), 2.0);
  EXPECT_DOUBLE_EQ(nfg.lower.payoff(p10, 1), 1.0);
  EXPECT_DOUBLE_EQ(nfg.upper.payoff(p10, 0), 4.0);
  EXPECT_DOUBLE_EQ(nfg.lower.payoff(p10, 0), 0.0);
  ASSERT_EQ(nfg.members.size(), 2u);
  EXPECT_DOUBLE_EQ(nfg.members[1].payoff(p01, 1), 0.0);
}

TEST(ToBoundedNfg, SingleMemberCollapses) {
  StubEstimator est(1);
  Rng rng(7);
  EmpiricalGame g(1);
  for (int m = 0; m < 3; ++m) g.extend(pref(m), est, rng);
  const auto nfg = to_bounded_nfg(g);
  for (std::size_t k = 0; k < nfg.mean.num_profiles(); ++k) {
    const auto prof = nfg.mean.profile_at(k);
    for (int i = 0; i < 2; ++i) {
      EXPECT_EQ(nfg.lower.payoff(prof, i), nfg.mean.payoff(prof, i));
      EXPECT_EQ(nfg.upper.payoff(prof, i), nfg.mean.payoff(prof, i));
    }
  }
  EXPECT_THROW(to_bounded_nfg(EmpiricalGame(1)), std::logic_error);
}

TEST(EmpiricalGame, SetEntryValidation) {
  EmpiricalGame g(1);
  g.add_strategy(pref(0));
  EXPECT_THROW(g.set_entry(0, 1, make_entry({{1.0, 2.0}}, 1)), std::out_of_range);
  g.set_entry(0, 0, make_entry({{1.0, 2.0}}, 1));
  EXPECT_THROW(g.set_entry(0, 0, make_entry({{1.0, 2.0}, {0.0, 0.0}}, 1)),
               std::invalid_argument);
  EXPECT_THROW(g.entry(0, 1), std::out_of_range);
  EXPECT_THROW(EmpiricalGame(0), std::invalid_argument);
}

TEST(EmpiricalGame, DumpRoundTripAndPrefix) {
  StubEstimator est(3);
  Rng rng(8);
  EmpiricalGame g(4);
  std::vector<PolicyPtr> strategies;
  for (int m = 0; m < 3; ++m) {
    strategies.push_back(pref(m));
    g.extend(strategies.back(), est, rng);
  }
  const auto j = g.to_json();
  const auto back = EmpiricalGame::from_json(nlohmann::json::parse(j.dump()),
                                             strategies);
  EXPECT_EQ(back.num_entries(), g.num_entries());
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) EXPECT_EQ(back.entry(a, b), g.entry(a, b));
  EXPECT_EQ(j.at("entries").at(0).at("lower").get<std::vector<double>>(),
            g.entry(0, 0).lower());
  EXPECT_EQ(j.at("entries").at(0).at("upper").get<std::vector<double>>(),
            g.entry(0, 0).upper());
  EXPECT_THROW(EmpiricalGame::from_json(j, {strategies[0]}), ArtifactError);

  const auto p = g.prefix(2);
  EXPECT_EQ(p.num_strategies(), 2);
  EXPECT_EQ(p.num_entries(), 3u);
  EXPECT_EQ(p.entry(1, 0), g.entry(1, 0));
  EXPECT_THROW(g.prefix(4), std::out_of_range);
}

TEST(ReconstructTrue, DeterministicGameGivesExactReturns) {
  auto game = testing::two_step_tree(
      {{{1.0, -1.0}, {0.0, 2.0}}, {{3.0, 1.0}, {-2.0, 0.5}}});
  const std::vector<PolicyPtr> s{pref(0), pref(1)};
  for (int n : {1, 17}) {
    Rng rng(9);
    const auto nfg = reconstruct_true(s, *game, n, rng);
    const int p01[2] = {0, 1};
    const int p10[2] = {1, 0};
    const int p11[2] = {1, 1};
    EXPECT_EQ(nfg.payoff(p01, 0), 0.0);
    EXPECT_EQ(nfg.payoff(p01, 1), 2.0);
    EXPECT_EQ(nfg.payoff(p10, 0), 2.0);
    EXPECT_EQ(nfg.payoff(p10, 1), 0.0);
    // Diagonal entries average the two seats.
    EXPECT_EQ(nfg.payoff(p11, 0), -0.75);
    EXPECT_EQ(nfg.payoff(p11, 1), -0.75);
  }
}

TEST(ReconstructTrue, ZeroRewardGameGivesZeroTable) {
  auto game = testing::two_step_tree(
      {{{0.0, 0.0}, {0.0, 0.0}}, {{0.0, 0.0}, {0.0, 0.0}}});
  const PolicyPtr u = std::make_shared<UniformRandomPolicy>();
  const std::vector<PolicyPtr> s{u, pref(1)};
  Rng rng(10);
  const auto nfg = reconstruct_true(s, *game, 50, rng);
  for (std::size_t k = 0; k < nfg.num_profiles(); ++k)
    for (double x : nfg.payoffs(nfg.profile_at(k))) EXPECT_EQ(x, 0.0);
}

TEST(ReconstructTrue, BargainingReproducibleForSeed) {
  const BargainingGame game(BargainingConfig::mini());
  const PolicyPtr u = std::make_shared<UniformRandomPolicy>();
  const std::vector<PolicyPtr> s{u, pref(0)};
  Rng a(11), b(11);
  const auto x = reconstruct_true(s, game, 1000, a);
  const auto y = reconstruct_true(s, game, 1000, b);
  for (std::size_t k = 0; k < x.num_profiles(); ++k) {
    const auto p = x.profile_at(k);
    EXPECT_EQ(x.payoff(p, 0), y.payoff(p, 0));
    EXPECT_EQ(x.payoff(p, 1), y.payoff(p, 1));
  }
}

}  // namespace
}  // namespace opsro
