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

#ifndef OPSRO_PSRO_DRIVER_HPP_
#define OPSRO_PSRO_DRIVER_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "opsro/dynamics_model.hpp"
#include "opsro/empirical_game.hpp"
#include "opsro/meta_solvers.hpp"
#include "opsro/nn.hpp"
#include "opsro/policy.hpp"
#include "opsro/response_oracle.hpp"
#include "opsro/trajectory.hpp"

namespace opsro {

struct BcConfig {
  int hidden_width = 200;
  int depth = 2;
  double learning_rate = 3e-4;
  int batch_size = 64;
  int training_steps = 10000;
  nn::OptimizerKind optimizer = nn::OptimizerKind::kAdam;

  void validate() const;
  std::string canonical_string() const;
};

// Softmax classifier over the legal actions of an information state.
class BehaviorClonePolicy final : public Policy {
 public:
  BehaviorClonePolicy(nn::Mlp network, std::string config_hash);

  std::vector<double> action_probabilities(
      std::span<const double> infostate, const LegalMask& legal) const override;
  bool deterministic() const override { return false; }
  std::string kind() const override { return "bc"; }

  const nn::Mlp& network() const { return network_; }
  nlohmann::json to_json() const;
  static std::shared_ptr<BehaviorClonePolicy> from_json(const nlohmann::json& j);

 private:
  nn::Mlp network_;
  std::string config_hash_;
};

// Per-timestep mixture: each act() call defers to `cloned` with probability
// alpha and to `trained` otherwise.
class MixedPolicy final : public Policy {
 public:
  MixedPolicy(PolicyPtr trained, PolicyPtr cloned, double alpha);

  std::vector<double> action_probabilities(
      std::span<const double> infostate, const LegalMask& legal) const override;
  ActionId act(std::span<const double> infostate, const LegalMask& legal,
               Rng& rng) const override;
  bool deterministic() const override;
  std::string kind() const override { return "mixed"; }

  const PolicyPtr& trained() const { return trained_; }
  const PolicyPtr& cloned() const { return cloned_; }
  double alpha() const { return alpha_; }

 private:
  PolicyPtr trained_;
  PolicyPtr cloned_;
  double alpha_;
};

std::shared_ptr<BehaviorClonePolicy> train_behavior_clone(
    const Dataset& dataset, const GameSchema& schema, const BcConfig& cfg,
    Rng& rng);

PolicyPtr mix_policy(PolicyPtr trained, PolicyPtr cloned, double alpha);

enum class Algorithm { kPsro, kCoffee, kOef, kOefBc };
Algorithm parse_algorithm(const std::string& name);
std::string algorithm_name(Algorithm algorithm);

struct RunConfig {
  Algorithm algorithm = Algorithm::kCoffee;
  int iterations = 40;
  int simulations_per_entry = 1000;
  SolverConfig mss;
  // COFFEE only.
  double penalty_weight = 0.0;
  double alpha_init = 0.0;
  int anneal_steps = 10;
  ObjectiveMode objective_mode = ObjectiveMode::kCoverageAugmented;
  // OEF_BC only.
  double alpha_bc = 0.0;
  std::uint64_t seed = 0;
  DdqnConfig ddqn;
  EnsembleConfig model;
  BcConfig bc;

  void validate() const;
};

struct IterationMetrics {
  int iteration = 0;
  double alpha = 0.0;
  double penalty_weight = 0.0;
  StopReason stop_reason = StopReason::kMaxSteps;
  int solver_steps = 0;
  double solver_metric = 0.0;
  // Mean of the per-episode rho logged while extending the game.
  double mean_rho = 0.0;
  int entries_simulated = 0;
  int br_episodes = 0;
  int br_coverage_episodes = 0;
  double br_loss = 0.0;
};

struct RunArtifacts {
  Algorithm algorithm = Algorithm::kCoffee;
  std::vector<PolicyPtr> strategies;
  // profiles[s] is the meta-strategy after iteration s over strategies 0..s.
  std::vector<MixedStrategy> profiles;
  EmpiricalGame game;
  std::vector<IterationMetrics> metrics;
  std::shared_ptr<const Ensemble> ensemble;
  std::shared_ptr<const BehaviorClonePolicy> behavior_clone;
  TrainingReport model_report;

  const std::vector<double>& rho_log() const { return game.rho_log(); }
};

RunArtifacts run_psro(std::shared_ptr<const StochasticGame> true_game,
                      const RunConfig& cfg, Rng& rng);

// Trains the ensemble on `dataset` and runs the offline loop in it.
RunArtifacts run_coffee(const Dataset& dataset,
                        std::shared_ptr<const GameSchema> schema,
                        const RunConfig& cfg, Rng& rng);
RunArtifacts run_oef(const Dataset& dataset,
                     std::shared_ptr<const GameSchema> schema,
                     const RunConfig& cfg, Rng& rng);
RunArtifacts run_oef_bc(const Dataset& dataset,
                        std::shared_ptr<const GameSchema> schema,
                        const RunConfig& cfg, Rng& rng);

// Offline loops against an already trained model.
RunArtifacts run_coffee_on_model(std::shared_ptr<const ModelMdp> model,
                                 const RunConfig& cfg, Rng& rng);
RunArtifacts run_oef_on_model(std::shared_ptr<const ModelMdp> model,
                              const RunConfig& cfg, Rng& rng);
// Replaces every strategy with its mixture with `clone`.
void apply_behavior_clone(RunArtifacts& artifacts,
                          std::shared_ptr<const BehaviorClonePolicy> clone,
                          double alpha_bc);

// Dispatches on cfg.algorithm. PSRO needs `true_game`.
RunArtifacts run_algorithm(const Dataset* dataset,
                           std::shared_ptr<const StochasticGame> true_game,
                           const RunConfig& cfg, Rng& rng);

// A symmetric meta-strategy over a strategy set, used as a behavior policy.
struct BehaviorProfile {
  std::vector<PolicyPtr> strategies;
  MixedStrategy weights;
};

// Each episode draws one profile uniformly, then every seat's strategy from
// that profile's weights.
Dataset generate_profile_mixture_dataset(const StochasticGame& game,
                                         std::span<const BehaviorProfile> profiles,
                                         int count, std::uint64_t seed,
                                         const std::string& behavior_tag);

}  // namespace opsro

#endif  // OPSRO_PSRO_DRIVER_HPP_
