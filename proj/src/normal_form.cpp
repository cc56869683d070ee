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

#include "opsro/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace opsro {

MixedStrategy MixedStrategy::uniform(int size) {
  if (size < 1) throw std::invalid_argument("uniform: size < 1");
  return {std::vector<double>(size, 1.0 / size)};
}

MixedStrategy MixedStrategy::one_hot(int size, int index) {
  if (index < 0 || index >= size)
    throw std::out_of_range("one_hot: index out of range");
  MixedStrategy s{std::vector<double>(size, 0.0)};
  s.weights[index] = 1.0;
  return s;
}

bool MixedStrategy::valid(double tol) const {
  if (weights.empty()) return false;
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= -tol)) return false;
    total += w;
  }
  return std::fabs(total - 1.0) <= tol;
}

NormalFormGame::NormalFormGame(int num_players, std::vector<int> strategy_counts)
    : num_players_(num_players), counts_(std::move(strategy_counts)) {
  if (num_players_ < 1 || static_cast<int>(counts_.size()) != num_players_)
    throw std::invalid_argument("NormalFormGame: bad player count");
  num_profiles_ = 1;
  for (int c : counts_) {
    if (c < 1) throw std::invalid_argument("NormalFormGame: empty strategy set");
    num_profiles_ *= static_cast<std::size_t>(c);
  }
  table_.assign(num_profiles_ * num_players_, 0.0);
}

std::size_t NormalFormGame::flat_index(std::span<const int> profile) const {
  if (static_cast<int>(profile.size()) != num_players_)
    throw std::invalid_argument("profile length mismatch");
  std::size_t k = 0;
  for (int i = 0; i < num_players_; ++i) {
    if (profile[i] < 0 || profile[i] >= counts_[i])
      throw std::out_of_range("strategy index out of range");
    k = k * counts_[i] + profile[i];
  }
  return k;
}

std::vector<int> NormalFormGame::profile_at(std::size_t k) const {
  std::vector<int> profile(num_players_);
  for (int i = num_players_ - 1; i >= 0; --i) {
    profile[i] = static_cast<int>(k % counts_[i]);
    k /= counts_[i];
  }
  return profile;
}

std::span<const double> NormalFormGame::payoffs(
    std::span<const int> profile) const {
  return {table_.data() + flat_index(profile) * num_players_,
          static_cast<std::size_t>(num_players_)};
}

std::span<double> NormalFormGame::payoffs(std::span<const int> profile) {
  return {table_.data() + flat_index(profile) * num_players_,
          static_cast<std::size_t>(num_players_)};
}

bool NormalFormGame::is_symmetric(double tol) const {
  for (int c : counts_)
    if (c != counts_[0]) return false;
  // Adjacent transpositions generate the symmetric group.
  for (std::size_t k = 0; k < num_profiles_; ++k) {
    const auto profile = profile_at(k);
    const auto u = payoffs(profile);
    for (int i = 0; i + 1 < num_players_; ++i) {
      auto swapped = profile;
      std::swap(swapped[i], swapped[i + 1]);
      const auto v = payoffs(swapped);
      for (int p = 0; p < num_players_; ++p) {
        int q = p == i ? i + 1 : (p == i + 1 ? i : p);
        if (std::fabs(u[p] - v[q]) > tol) return false;
      }
    }
  }
  return true;
}

NormalFormGame make_bimatrix(const std::vector<std::vector<double>>& row,
                             const std::vector<std::vector<double>>& col) {
  const int m = static_cast<int>(row.size());
  const int n = m > 0 ? static_cast<int>(row[0].size()) : 0;
  NormalFormGame game(2, {m, n});
  if (static_cast<int>(col.size()) != m)
    throw std::invalid_argument("make_bimatrix: shape mismatch");
  for (int k = 0; k < m; ++k) {
    if (static_cast<int>(row[k].size()) != n ||
        static_cast<int>(col[k].size()) != n)
      throw std::invalid_argument("make_bimatrix: ragged matrix");
    for (int l = 0; l < n; ++l) {
      const int profile[] = {k, l};
      auto u = game.payoffs(profile);
      u[0] = row[k][l];
      u[1] = col[k][l];
    }
  }
  return game;
}

NormalFormGame make_symmetric(const std::vector<std::vector<double>>& a) {
  std::vector<std::vector<double>> col(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    col[k].resize(a.size());
    for (std::size_t l = 0; l < a.size(); ++l) col[k][l] = a.at(l).at(k);
  }
  return make_bimatrix(a, col);
}

namespace {

void check_profile(const NormalFormGame& game,
                   std::span<const MixedStrategy> profile) {
  if (static_cast<int>(profile.size()) != game.num_players())
    throw std::invalid_argument("profile has wrong number of players");
  for (int i = 0; i < game.num_players(); ++i)
    if (profile[i].size() != game.strategy_counts()[i])
      throw std::invalid_argument("mixed strategy length mismatch");
}

// Sum over pure profiles with player `fixed_player` pinned to `fixed_action`
// (or unpinned when fixed_player < 0).
std::vector<double> expectation(const NormalFormGame& game,
                                std::span<const MixedStrategy> profile,
                                int fixed_player, int fixed_action) {
  const int n = game.num_players();
  std::vector<double> total(n, 0.0);
  for (std::size_t k = 0; k < game.num_profiles(); ++k) {
    const auto pure = game.profile_at(k);
    double weight = 1.0;
    for (int i = 0; i < n && weight != 0.0; ++i) {
      if (i == fixed_player)
        weight *= pure[i] == fixed_action ? 1.0 : 0.0;
      else
        weight *= profile[i].weights[pure[i]];
    }
    if (weight == 0.0) continue;
    const auto u = game.payoffs(pure);
    for (int i = 0; i < n; ++i) total[i] += weight * u[i];
  }
  return total;
}

}  // namespace

std::vector<double> mixed_payoff(const NormalFormGame& game,
                                 std::span<const MixedStrategy> profile) {
  check_profile(game, profile);
  return expectation(game, profile, -1, -1);
}

std::vector<double> deviation_payoffs(const NormalFormGame& game,
                                      std::span<const MixedStrategy> profile,
                                      int player) {
  check_profile(game, profile);
  std::vector<double> out(game.strategy_counts().at(player));
  for (int k = 0; k < static_cast<int>(out.size()); ++k)
    out[k] = expectation(game, profile, player, k)[player];
  return out;
}

std::vector<double> regret(const NormalFormGame& game,
                           std::span<const MixedStrategy> profile) {
  check_profile(game, profile);
  const auto value = mixed_payoff(game, profile);
  std::vector<double> out(game.num_players());
  for (int i = 0; i < game.num_players(); ++i) {
    const auto dev = deviation_payoffs(game, profile, i);
    out[i] = *std::max_element(dev.begin(), dev.end()) - value[i];
  }
  return out;
}

}  // namespace opsro
