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

#include "opsro/run_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "opsro/response_oracle.hpp"

namespace opsro {

namespace fs = std::filesystem;

nlohmann::json policy_to_json(const Policy& policy) {
  if (dynamic_cast<const UniformRandomPolicy*>(&policy))
    return {{"kind", "uniform"}};
  if (auto q = dynamic_cast<const QPolicy*>(&policy)) return q->to_json();
  if (auto bc = dynamic_cast<const BehaviorClonePolicy*>(&policy))
    return bc->to_json();
  if (auto mix = dynamic_cast<const MixedPolicy*>(&policy)) {
    return {{"kind", "mixed"},
            {"alpha", mix->alpha()},
            {"trained", policy_to_json(*mix->trained())},
            {"cloned", policy_to_json(*mix->cloned())}};
  }
  throw ArtifactError("cannot serialize policy of kind '" + policy.kind() + "'");
}

PolicyPtr policy_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "uniform") return std::make_shared<UniformRandomPolicy>();
    if (kind == "q") return QPolicy::from_json(j);
    if (kind == "bc") return BehaviorClonePolicy::from_json(j);
    if (kind == "mixed")
      return mix_policy(policy_from_json(j.at("trained")),
                        policy_from_json(j.at("cloned")),
                        j.at("alpha").get<double>());
    throw ArtifactError("unknown policy kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(std::string("malformed policy: ") + e.what());
  }
}

namespace {

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("missing file " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError("malformed " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << text;
}

std::string strategy_file(std::size_t k) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "strategy_%03zu.json", k);
  return buf;
}

}  // namespace

void save_policy(const fs::path& path, const Policy& policy) {
  write_text(path, policy_to_json(policy).dump() + "\n");
}

PolicyPtr load_policy(const fs::path& path) {
  return policy_from_json(read_json(path));
}

std::string format_csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_run(const fs::path& dir, const RunArtifacts& artifacts,
               const ExperimentSpec& spec, const nlohmann::json& meta) {
  fs::create_directories(dir / "strategies");
  for (std::size_t k = 0; k < artifacts.strategies.size(); ++k)
    save_policy(dir / "strategies" / strategy_file(k), *artifacts.strategies[k]);

  const std::size_t m = artifacts.strategies.size();
  std::ostringstream profiles;
  profiles << "iteration";
  for (std::size_t k = 0; k < m; ++k) profiles << ",w" << k;
  profiles << "\n";
  for (std::size_t s = 0; s < artifacts.profiles.size(); ++s) {
    profiles << s;
    const auto& w = artifacts.profiles[s].weights;
    for (std::size_t k = 0; k < m; ++k)
      profiles << "," << format_csv_double(k < w.size() ? w[k] : 0.0);
    profiles << "\n";
  }
  write_text(dir / "profiles.csv", profiles.str());

  std::ostringstream metrics;
  metrics << "iteration,alpha,penalty_weight,stop_reason,solver_steps,"
             "solver_metric,mean_rho,entries_simulated,br_episodes,"
             "br_coverage_episodes,br_loss\n";
  for (const auto& x : artifacts.metrics) {
    metrics << x.iteration << "," << format_csv_double(x.alpha) << ","
            << format_csv_double(x.penalty_weight) << ","
            << stop_reason_name(x.stop_reason) << "," << x.solver_steps << ","
            << format_csv_double(x.solver_metric) << ","
            << format_csv_double(x.mean_rho) << "," << x.entries_simulated
            << "," << x.br_episodes << "," << x.br_coverage_episodes << ","
            << format_csv_double(x.br_loss) << "\n";
  }
  write_text(dir / "metrics.csv", metrics.str());

  std::ostringstream rho;
  for (double v : artifacts.rho_log()) rho << format_csv_double(v) << "\n";
  write_text(dir / "rho.csv", rho.str());

  save_spec(dir / "config.ini", spec);
  write_text(dir / "empirical_game.json", artifacts.game.to_json().dump() + "\n");
  if (artifacts.ensemble) save_ensemble(dir / "model.json", *artifacts.ensemble);

  nlohmann::json run = meta;
  run["algorithm"] = algorithm_name(artifacts.algorithm);
  run["num_strategies"] = m;
  run["num_profiles"] = artifacts.profiles.size();
  run["has_model"] = static_cast<bool>(artifacts.ensemble);
  write_text(dir / "run.json", run.dump(2) + "\n");
}

RunRecord read_run(const fs::path& dir, std::shared_ptr<const GameSchema> schema) {
  if (!fs::is_directory(dir))
    throw ArtifactError("run directory " + dir.string() + " does not exist");
  RunRecord r;
  r.meta = read_json(dir / "run.json");
  try {
    r.spec = load_spec(dir / "config.ini");
  } catch (const ConfigError& e) {
    throw ArtifactError(std::string("bad config snapshot: ") + e.what());
  }
  const auto m = r.meta.value("num_strategies", std::size_t{0});
  if (m == 0) throw ArtifactError("run has no strategies");
  if (r.meta.value("game_config_hash", std::string()) != schema->config_hash())
    throw ArtifactError("run was produced for a different game");
  for (std::size_t k = 0; k < m; ++k)
    r.strategies.push_back(load_policy(dir / "strategies" / strategy_file(k)));

  std::ifstream profiles(dir / "profiles.csv");
  if (!profiles) throw ArtifactError("missing profiles.csv");
  std::string line;
  std::getline(profiles, line);
  for (std::size_t s = 0; std::getline(profiles, line); ++s) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string cell;
    std::getline(is, cell, ',');
    std::vector<double> w;
    while (std::getline(is, cell, ',')) w.push_back(std::stod(cell));
    // Profile s covers strategies 0..s.
    if (w.size() != m || s + 1 > m) throw ArtifactError("malformed profiles.csv");
    w.resize(s + 1);
    r.profiles.push_back({std::move(w)});
  }
  if (r.profiles.size() != r.meta.value("num_profiles", std::size_t{0}))
    throw ArtifactError("profiles.csv is incomplete");

  std::ifstream rho(dir / "rho.csv");
  if (!rho) throw ArtifactError("missing rho.csv");
  while (std::getline(rho, line))
    if (!line.empty()) r.rho_log.push_back(std::stod(line));

  r.game = EmpiricalGame::from_json(read_json(dir / "empirical_game.json"),
                                    r.strategies);
  if (r.meta.value("has_model", false))
    r.ensemble = std::make_shared<const Ensemble>(
        load_ensemble(dir / "model.json", std::move(schema)));
  return r;
}

}  // namespace opsro
