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

#include "opsro/policy.hpp"

#include <stdexcept>

namespace opsro {

ActionId Policy::act(std::span<const double> infostate, const LegalMask& legal,
                     Rng& rng) const {
  return sample_action(action_probabilities(infostate, legal), rng);
}

ActionId sample_action(std::span<const double> probabilities, Rng& rng) {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  int last_positive = -1;
  for (int a = 0; a < static_cast<int>(probabilities.size()); ++a) {
    if (probabilities[a] <= 0.0) continue;
    cumulative += probabilities[a];
    last_positive = a;
    if (u < cumulative) return a;
  }
  if (last_positive < 0)
    throw std::invalid_argument("sample_action: distribution has no mass");
  return last_positive;
}

std::vector<double> UniformRandomPolicy::action_probabilities(
    std::span<const double>, const LegalMask& legal) const {
  std::vector<double> probs(legal.size(), 0.0);
  int count = 0;
  for (auto bit : legal) count += bit ? 1 : 0;
  if (count == 0) throw std::invalid_argument("no legal actions");
  for (std::size_t a = 0; a < legal.size(); ++a)
    if (legal[a]) probs[a] = 1.0 / count;
  return probs;
}

ActionId UniformRandomPolicy::act(std::span<const double>,
                                  const LegalMask& legal, Rng& rng) const {
  const auto actions = actions_from_mask(legal);
  if (actions.empty()) throw std::invalid_argument("no legal actions");
  std::uniform_int_distribution<std::size_t> pick(0, actions.size() - 1);
  return actions[pick(rng)];
}

}  // namespace opsro
