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

#ifndef OPSRO_POLICY_HPP_
#define OPSRO_POLICY_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "opsro/common.hpp"

namespace opsro {

// A pure strategy: maps an information state to a distribution over the
// legal actions.
class Policy {
 public:
  virtual ~Policy() = default;

  // Distribution over the full action space; zero on illegal actions.
  virtual std::vector<double> action_probabilities(
      std::span<const double> infostate, const LegalMask& legal) const = 0;

  // Samples from action_probabilities(). Deterministic policies override this
  // without touching `rng`.
  virtual ActionId act(std::span<const double> infostate,
                       const LegalMask& legal, Rng& rng) const;

  virtual bool deterministic() const = 0;
  virtual std::string kind() const = 0;
};

using PolicyPtr = std::shared_ptr<const Policy>;

// Inverse-CDF draw from a discrete distribution. Consumes exactly one uniform.
ActionId sample_action(std::span<const double> probabilities, Rng& rng);

// Uniform over legal actions.
class UniformRandomPolicy final : public Policy {
 public:
  std::vector<double> action_probabilities(
      std::span<const double> infostate, const LegalMask& legal) const override;
  ActionId act(std::span<const double> infostate, const LegalMask& legal,
               Rng& rng) const override;
  bool deterministic() const override { return false; }
  std::string kind() const override { return "uniform"; }
};

}  // namespace opsro

#endif  // OPSRO_POLICY_HPP_
