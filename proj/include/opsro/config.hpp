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

#ifndef OPSRO_CONFIG_HPP_
#define OPSRO_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "opsro/bargaining.hpp"
#include "opsro/dynamics_model.hpp"
#include "opsro/evaluation.hpp"
#include "opsro/meta_solvers.hpp"
#include "opsro/psro_driver.hpp"
#include "opsro/response_oracle.hpp"

namespace opsro {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetSpec {
  std::string behavior = "uniform";  // uniform | sigma_eq
  int size = 1000;
  std::uint64_t seed = 0;
  // sigma_eq: PSRO trials whose final profiles form the behavior mixture.
  int sigma_eq_trials = 5;
  int sigma_eq_iterations = 20;
  // Directory of cached sigma_eq profile checkpoints; built when missing.
  std::string checkpoints;
};

struct ExperimentSpec {
  std::string preset = "default";  // default | mini
  BargainingConfig game;
  DatasetSpec dataset;
  EnsembleConfig model;
  DdqnConfig ddqn;
  BcConfig bc;
  double penalty_weight = 0.0;
  double alpha_init = 0.0;
  int anneal_steps = 10;
  ObjectiveMode objective_mode = ObjectiveMode::kCoverageAugmented;
  SolverConfig mss;
  Algorithm algorithm = Algorithm::kCoffee;
  int iterations = 40;
  int simulations_per_entry = 1000;
  double alpha_bc = 0.0;
  std::uint64_t seed = 0;
  EvalConfig eval;
  std::vector<SolverKind> eval_solvers = {SolverKind::kRD, SolverKind::kR2D};

  RunConfig run_config() const;
  // Throws ConfigError.
  void validate() const;
};

// Flat sectioned key = value text. Unknown sections or keys throw ConfigError.
ExperimentSpec parse_spec(std::istream& in);
ExperimentSpec load_spec(const std::filesystem::path& path);
// Every key with its effective value; parse_spec(spec_to_ini(s)) == s.
std::string spec_to_ini(const ExperimentSpec& spec);
void save_spec(const std::filesystem::path& path, const ExperimentSpec& spec);

// Shrinks step counts, simulations and iterations for quick runs.
void apply_desk_scale(ExperimentSpec& spec);

}  // namespace opsro

#endif  // OPSRO_CONFIG_HPP_
