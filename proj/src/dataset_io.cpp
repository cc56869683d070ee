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

#include "opsro/dataset_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"

namespace opsro {
namespace {

using nlohmann::json;

json trajectory_to_json(const Trajectory& traj) {
  json states = json::array(), observations = json::array(),
       actions = json::array(), rewards = json::array(),
       players = json::array(), masks = json::array();
  for (const auto& step : traj.steps) {
    states.push_back(step.state);
    observations.push_back(step.observation);
    actions.push_back(step.action);
    rewards.push_back(step.rewards);
    players.push_back(step.acting_player);
    masks.push_back(step.legal_mask);
  }
  return json{{"states", states},
              {"observations", observations},
              {"actions", actions},
              {"rewards", rewards},
              {"acting_players", players},
              {"legal_masks", masks},
              {"episode_return", traj.episode_return},
              {"terminated", traj.terminated},
              {"final_state", traj.final_state}};
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory traj;
  const auto& actions = j.at("actions");
  const std::size_t len = actions.size();
  const auto& states = j.at("states");
  const auto& observations = j.at("observations");
  const auto& rewards = j.at("rewards");
  const auto& players = j.at("acting_players");
  const auto& masks = j.at("legal_masks");
  if (states.size() != len || observations.size() != len ||
      rewards.size() != len || players.size() != len || masks.size() != len)
    throw ArtifactError("dataset record has ragged step arrays");
  traj.steps.resize(len);
  for (std::size_t t = 0; t < len; ++t) {
    auto& step = traj.steps[t];
    step.state = states[t].get<std::vector<double>>();
    step.observation = observations[t].get<std::vector<double>>();
    step.action = actions[t].get<ActionId>();
    step.rewards = rewards[t].get<std::vector<double>>();
    step.acting_player = players[t].get<int>();
    step.legal_mask = masks[t].get<LegalMask>();
  }
  traj.episode_return = j.at("episode_return").get<std::vector<double>>();
  traj.terminated = j.at("terminated").get<bool>();
  traj.final_state = j.at("final_state").get<std::vector<double>>();
  return traj;
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& dataset) {
  json header{{"type", "header"},
              {"behavior_policy", dataset.metadata.behavior_policy_tag},
              {"seed", dataset.metadata.seed},
              {"game_config_hash", dataset.metadata.game_config_hash},
              {"num_trajectories", dataset.trajectories.size()}};
  out << header.dump() << '\n';
  for (const auto& traj : dataset.trajectories)
    out << trajectory_to_json(traj).dump() << '\n';
}

Dataset read_dataset(std::istream& in) {
  Dataset dataset;
  std::string line;
  if (!std::getline(in, line)) throw ArtifactError("dataset: missing header");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw ArtifactError(std::string("dataset: bad header: ") + e.what());
  }
  if (header.value("type", "") != "header")
    throw ArtifactError("dataset: first record is not a header");
  dataset.metadata.behavior_policy_tag =
      header.at("behavior_policy").get<std::string>();
  dataset.metadata.seed = header.at("seed").get<std::uint64_t>();
  dataset.metadata.game_config_hash =
      header.at("game_config_hash").get<std::string>();
  const auto expected = header.at("num_trajectories").get<std::size_t>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      dataset.trajectories.push_back(trajectory_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ArtifactError(std::string("dataset: bad record: ") + e.what());
    }
  }
  if (dataset.trajectories.size() != expected)
    throw ArtifactError("dataset: trajectory count does not match header");
  return dataset;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot open " + path.string());
  write_dataset(out, dataset);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace opsro
