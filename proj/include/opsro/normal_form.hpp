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

#ifndef OPSRO_NORMAL_FORM_HPP_
#define OPSRO_NORMAL_FORM_HPP_

#include <span>
#include <vector>

namespace opsro {

// Distribution over a player's strategy indices.
struct MixedStrategy {
  std::vector<double> weights;

  static MixedStrategy uniform(int size);
  static MixedStrategy one_hot(int size, int index);
  int size() const { return static_cast<int>(weights.size()); }
  // Nonnegative and summing to one within `tol`.
  bool valid(double tol = 1e-9) const;
};

// n-player normal-form game with a dense payoff tensor.
class NormalFormGame {
 public:
  NormalFormGame(int num_players, std::vector<int> strategy_counts);

  int num_players() const { return num_players_; }
  const std::vector<int>& strategy_counts() const { return counts_; }
  std::size_t num_profiles() const { return num_profiles_; }

  // Payoff vector (length n) of a pure profile.
  std::span<const double> payoffs(std::span<const int> profile) const;
  std::span<double> payoffs(std::span<const int> profile);
  double payoff(std::span<const int> profile, int player) const {
    return payoffs(profile)[player];
  }

  // Pure profile at flat index `k` (row-major, last player fastest).
  std::vector<int> profile_at(std::size_t k) const;
  std::size_t flat_index(std::span<const int> profile) const;

  // True if payoffs are invariant under simultaneous permutation of players
  // and their strategy indices (all counts equal).
  bool is_symmetric(double tol = 1e-12) const;

 private:
  int num_players_;
  std::vector<int> counts_;
  std::size_t num_profiles_;
  std::vector<double> table_;
};

// Two-player game from player payoff matrices (row player 0, column player 1).
NormalFormGame make_bimatrix(const std::vector<std::vector<double>>& row,
                             const std::vector<std::vector<double>>& col);
// Symmetric two-player game: u_0(k, l) = a[k][l], u_1(k, l) = a[l][k].
NormalFormGame make_symmetric(const std::vector<std::vector<double>>& a);

// Expected payoff vector under independent mixing.
std::vector<double> mixed_payoff(const NormalFormGame& game,
                                 std::span<const MixedStrategy> profile);

// u_i(pure k, sigma_{-i}) for every k of player i.
std::vector<double> deviation_payoffs(const NormalFormGame& game,
                                      std::span<const MixedStrategy> profile,
                                      int player);

// Per-player gain of the best pure unilateral deviation.
std::vector<double> regret(const NormalFormGame& game,
                           std::span<const MixedStrategy> profile);

}  // namespace opsro

#endif  // OPSRO_NORMAL_FORM_HPP_
