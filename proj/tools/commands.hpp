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


#ifndef OPSRO_TOOLS_COMMANDS_HPP_
#define OPSRO_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "opsro/config.hpp"

namespace opsro::cli {

struct CommonOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  bool desk_scale = false;
};

// Loads the config file (defaults when empty), then applies --desk-scale.
ExperimentSpec resolve_spec(const CommonOptions& opts);

// Writes a dataset file. sigma_eq datasets build or reuse PSRO checkpoints
// under [dataset] checkpoints.
void cmd_generate_dataset(const CommonOptions& opts,
                          const std::filesystem::path& out);

// Runs the configured algorithm and writes a run directory. The dataset may
// be empty for PSRO.
void cmd_solve(const CommonOptions& opts, const std::filesystem::path& dataset,
               const std::filesystem::path& out);

// Re-solves every prefix game with each evaluation solver, measures true-game
// regret, model fidelity and mean rho. Options come from the run's config
// snapshot; opts.config, when set, supplies the [eval] section instead.
// Output goes to `out`, or <run_dir>/eval when empty.
void cmd_evaluate(const std::filesystem::path& run_dir,
                  const CommonOptions& opts, const std::filesystem::path& out);

// Aggregates evaluated runs into summary, scatter and Welch tables.
void cmd_report(const std::vector<std::filesystem::path>& run_dirs,
                const std::filesystem::path& out);

// Full command line. Returns the process exit code: 0 success, 2 config
// error, 3 artifact error, 1 anything else.
int run(int argc, char** argv);

}  // namespace opsro::cli

#endif  // OPSRO_TOOLS_COMMANDS_HPP_
