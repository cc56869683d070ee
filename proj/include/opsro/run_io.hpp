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

#ifndef OPSRO_RUN_IO_HPP_
#define OPSRO_RUN_IO_HPP_

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "opsro/config.hpp"
#include "opsro/dynamics_model.hpp"
#include "opsro/empirical_game.hpp"
#include "opsro/policy.hpp"
#include "opsro/psro_driver.hpp"

namespace opsro {

// Uniform, Q-network, behavior-clone and mixed policies. Throws
// ArtifactError for kinds that cannot be stored.
nlohmann::json policy_to_json(const Policy& policy);
PolicyPtr policy_from_json(const nlohmann::json& j);

void save_policy(const std::filesystem::path& path, const Policy& policy);
PolicyPtr load_policy(const std::filesystem::path& path);

std::string format_csv_double(double v);

struct RunRecord {
  ExperimentSpec spec;
  nlohmann::json meta;
  std::vector<PolicyPtr> strategies;
  std::vector<MixedStrategy> profiles;
  std::vector<double> rho_log;
  EmpiricalGame game;
  std::shared_ptr<const Ensemble> ensemble;  // offline runs only
};

// Writes strategies/, profiles.csv, metrics.csv, rho.csv, config.ini,
// empirical_game.json, run.json and model.json when a model exists.
void write_run(const std::filesystem::path& dir, const RunArtifacts& artifacts,
               const ExperimentSpec& spec, const nlohmann::json& meta);

// Throws ArtifactError on missing or inconsistent files.
RunRecord read_run(const std::filesystem::path& dir,
                   std::shared_ptr<const GameSchema> schema);

}  // namespace opsro

#endif  // OPSRO_RUN_IO_HPP_
