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

#include "opsro/empirical_game.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "opsro/trajectory.hpp"

namespace opsro {

std::vector<double> PayoffEntry::lower() const {
  std::vector<double> out = per_member_utilities.at(0);
  for (const auto& row : per_member_utilities)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(out[i], row[i]);
  return out;
}

std::vector<double> PayoffEntry::upper() const {
  std::vector<double> out = per_member_utilities.at(0);
  for (const auto& row : per_member_utilities)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], row[i]);
  return out;
}

PayoffEntry PayoffEntry::swapped() const {
  PayoffEntry out = *this;
  for (auto& row : out.per_member_utilities) std::reverse(row.begin(), row.end());
  std::reverse(out.mean_utilities.begin(), out.mean_utilities.end());
  return out;
}

PayoffEntry make_entry(std::vector<std::vector<double>> per_member,
                       int num_samples) {
  if (per_member.empty()) throw std::invalid_argument("entry without members");
  PayoffEntry e;
  e.mean_utilities = mean_prediction(per_member);
  e.per_member_utilities = std::move(per_member);
  e.num_samples = num_samples;
  return e;
}

ModelPayoffEstimator::ModelPayoffEstimator(std::shared_ptr<const ModelMdp> model)
    : model_(std::move(model)) {
  if (!model_) throw std::invalid_argument("ModelPayoffEstimator: null model");
}

PayoffEntry ModelPayoffEstimator::estimate(std::span<const PolicyPtr> profile,
                                           int num_simulations, Rng& rng,
                                           std::vector<double>* rho_log) const {
  return estimate_entry(*model_, profile, num_simulations, rng, rho_log);
}

PayoffEntry estimate_entry(const ModelMdp& model,
                           std::span<const PolicyPtr> profile,
                           int num_simulations, Rng& rng,
                           std::vector<double>* rho_log) {
  if (num_simulations < 1) throw std::invalid_argument("estimate_entry: N < 1");
  const int k_members = model.ensemble().size();
  const int n = model.num_players();
  std::vector<std::vector<double>> sums(k_members, std::vector<double>(n, 0.0));
  for (int sim = 0; sim < num_simulations; ++sim) {
    const ModelRollout r = model_rollout(model, profile, rng);
    for (int j = 0; j < k_members; ++j)
      for (int i = 0; i < n; ++i) sums[j][i] += r.per_member_returns[j][i];
    if (rho_log) {
      const auto& rho = r.rho_per_step;
      rho_log->push_back(
          rho.empty() ? 0.0
                      : std::accumulate(rho.begin(), rho.end(), 0.0) / rho.size());
    }
  }
  for (auto& row : sums)
    for (auto& x : row) x /= num_simulations;
  return make_entry(std::move(sums), num_simulations);
}

TrueGamePayoffEstimator::TrueGamePayoffEstimator(
    std::shared_ptr<const StochasticGame> game)
    : game_(std::move(game)) {
  if (!game_) throw std::invalid_argument("TrueGamePayoffEstimator: null game");
}

PayoffEntry TrueGamePayoffEstimator::estimate(std::span<const PolicyPtr> profile,
                                              int num_simulations, Rng& rng,
                                              std::vector<double>*) const {
  if (num_simulations < 1) throw std::invalid_argument("estimate: N < 1");
  const int n = game_->num_players();
  std::vector<double> sums(n, 0.0);
  for (int sim = 0; sim < num_simulations; ++sim) {
    const Trajectory t =
        rollout(*game_, profile, rng, game_->max_episode_length());
    for (int i = 0; i < n; ++i) sums[i] += t.episode_return[i];
  }
  for (auto& x : sums) x /= num_simulations;
  return make_entry({std::move(sums)}, num_simulations);
}

BoundedNFG collapsed_bounds(const NormalFormGame& mean) {
  return {mean, mean, mean, {mean}};
}

EmpiricalGame::EmpiricalGame(int num_simulations)
    : num_simulations_(num_simulations) {
  if (num_simulations < 1)
    throw std::invalid_argument("EmpiricalGame: num_simulations < 1");
}

bool EmpiricalGame::has_entry(int a, int b) const {
  return table_.count({std::min(a, b), std::max(a, b)}) > 0;
}

PayoffEntry EmpiricalGame::entry(int a, int b) const {
  auto it = table_.find({std::min(a, b), std::max(a, b)});
  if (it == table_.end())
    throw std::out_of_range("EmpiricalGame: no entry for profile");
  return a <= b ? it->second : it->second.swapped();
}

void EmpiricalGame::set_entry(int a, int b, PayoffEntry entry) {
  if (a < 0 || b < 0 || a >= num_strategies() || b >= num_strategies())
    throw std::out_of_range("EmpiricalGame: strategy index out of range");
  const int k = static_cast<int>(entry.per_member_utilities.size());
  if (k < 1 || entry.mean_utilities.size() != 2u)
    throw std::invalid_argument("EmpiricalGame: malformed entry");
  if (num_members_ != 0 && k != num_members_)
    throw std::invalid_argument("EmpiricalGame: member count changed");
  num_members_ = k;
  table_[{std::min(a, b), std::max(a, b)}] = a <= b ? std::move(entry)
                                                    : entry.swapped();
}

void EmpiricalGame::add_strategy(PolicyPtr policy) {
  if (!policy) throw std::invalid_argument("EmpiricalGame: null policy");
  strategies_.push_back(std::move(policy));
}

int EmpiricalGame::extend(PolicyPtr policy, const PayoffEstimator& estimator,
                          Rng& rng) {
  if (estimator.num_players() != 2)
    throw std::invalid_argument("EmpiricalGame: two players only");
  add_strategy(std::move(policy));
  const int m = num_strategies() - 1;
  // One seed per profile so entries could be estimated in any order.
  const std::uint64_t base = rng();
  for (int other = 0; other <= m; ++other) {
    Rng profile_rng(derive_seed(base, static_cast<std::uint64_t>(other)));
    const PolicyPtr joint[2] = {strategies_[other], strategies_[m]};
    set_entry(other, m,
              estimator.estimate(joint, num_simulations_, profile_rng,
                                 &rho_log_));
  }
  return m + 1;
}

bool EmpiricalGame::complete() const {
  const std::size_t m = strategies_.size();
  return table_.size() == m * (m + 1) / 2;
}

nlohmann::json EmpiricalGame::to_json() const {
  nlohmann::json j;
  j["num_players"] = 2;
  j["num_simulations"] = num_simulations_;
  j["num_members"] = num_members_;
  auto& strategies = j["strategies"] = nlohmann::json::array();
  for (std::size_t k = 0; k < strategies_.size(); ++k)
    strategies.push_back({{"index", k}, {"kind", strategies_[k]->kind()}});
  auto& entries = j["entries"] = nlohmann::json::array();
  for (const auto& [key, e] : table_) {
    entries.push_back({{"profile", {key.first, key.second}},
                       {"per_member_utilities", e.per_member_utilities},
                       {"mean", e.mean_utilities},
                       {"lower", e.lower()},
                       {"upper", e.upper()},
                       {"num_samples", e.num_samples}});
  }
  return j;
}

EmpiricalGame EmpiricalGame::prefix(int count) const {
  if (count < 0 || count > num_strategies())
    throw std::out_of_range("EmpiricalGame::prefix: bad count");
  EmpiricalGame out(num_simulations_);
  out.num_members_ = num_members_;
  out.strategies_.assign(strategies_.begin(), strategies_.begin() + count);
  for (const auto& [key, e] : table_)
    if (key.second < count) out.table_.emplace(key, e);
  return out;
}

EmpiricalGame EmpiricalGame::from_json(const nlohmann::json& j,
                                       std::vector<PolicyPtr> strategies) {
  EmpiricalGame out(j.at("num_simulations").get<int>());
  if (j.at("strategies").size() != strategies.size())
    throw ArtifactError("empirical game: strategy count mismatch");
  for (auto& s : strategies) out.add_strategy(std::move(s));
  for (const auto& e : j.at("entries")) {
    const auto key = e.at("profile").get<std::vector<int>>();
    if (key.size() != 2u) throw ArtifactError("empirical game: bad profile key");
    PayoffEntry entry;
    entry.per_member_utilities =
        e.at("per_member_utilities").get<std::vector<std::vector<double>>>();
    entry.mean_utilities = e.at("mean").get<std::vector<double>>();
    entry.num_samples = e.at("num_samples").get<int>();
    out.set_entry(key[0], key[1], std::move(entry));
  }
  return out;
}

NormalFormGame symmetric_game_from(
    int num_strategies, const std::map<std::pair<int, int>, PayoffEntry>& table,
    int member) {
  NormalFormGame g(2, {num_strategies, num_strategies});
  auto pick = [&](const PayoffEntry& e) -> const std::vector<double>& {
    return member < 0 ? e.mean_utilities : e.per_member_utilities.at(member);
  };
  for (int a = 0; a < num_strategies; ++a) {
    for (int b = a; b < num_strategies; ++b) {
      auto it = table.find({a, b});
      if (it == table.end())
        throw std::logic_error("empirical game table is incomplete");
      const auto& u = pick(it->second);
      const int ab[2] = {a, b};
      const int ba[2] = {b, a};
      if (a == b) {
        const double v = 0.5 * (u[0] + u[1]);
        auto p = g.payoffs(ab);
        p[0] = p[1] = v;
      } else {
        auto p = g.payoffs(ab);
        p[0] = u[0];
        p[1] = u[1];
        auto q = g.payoffs(ba);
        q[0] = u[1];
        q[1] = u[0];
      }
    }
  }
  return g;
}

BoundedNFG to_bounded_nfg(const EmpiricalGame& game) {
  const int m = game.num_strategies();
  if (m < 1 || !game.complete())
    throw std::logic_error("to_bounded_nfg: incomplete table");
  std::map<std::pair<int, int>, PayoffEntry> table;
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) table[{a, b}] = game.entry(a, b);
  std::vector<NormalFormGame> members;
  for (int j = 0; j < game.num_members(); ++j)
    members.push_back(symmetric_game_from(m, table, j));
  NormalFormGame mean = symmetric_game_from(m, table, -1);
  NormalFormGame lower = mean;
  NormalFormGame upper = mean;
  for (std::size_t k = 0; k < mean.num_profiles(); ++k) {
    const auto profile = mean.profile_at(k);
    auto lo = lower.payoffs(profile);
    auto hi = upper.payoffs(profile);
    for (int i = 0; i < 2; ++i) {
      lo[i] = hi[i] = members[0].payoff(profile, i);
      for (const auto& g : members) {
        lo[i] = std::min(lo[i], g.payoff(profile, i));
        hi[i] = std::max(hi[i], g.payoff(profile, i));
      }
    }
  }
  return {std::move(lower), std::move(mean), std::move(upper), std::move(members)};
}

NormalFormGame reconstruct_true(std::span<const PolicyPtr> strategies,
                                const StochasticGame& true_game,
                                int num_simulations, Rng& rng) {
  if (true_game.num_players() != 2)
    throw std::invalid_argument("reconstruct_true: two players only");
  EmpiricalGame g(num_simulations);
  // Borrowed pointer; the estimator never outlives this call.
  TrueGamePayoffEstimator estimator(std::shared_ptr<const StochasticGame>(
      &true_game, [](const StochasticGame*) {}));
  for (const auto& s : strategies) g.extend(s, estimator, rng);
  return to_bounded_nfg(g).mean;
}

}  // namespace opsro
