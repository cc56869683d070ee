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

#ifndef OPSRO_DYNAMICS_MODEL_HPP_
#define OPSRO_DYNAMICS_MODEL_HPP_

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "opsro/game.hpp"
#include "opsro/nn.hpp"
#include "opsro/trajectory.hpp"

namespace opsro {

struct EnsembleConfig {
  int ensemble_size = 4;
  int hidden_width = 250;
  int depth = 2;
  int batch_size = 64;
  double learning_rate = 3e-4;
  int training_steps = 10000;
  double terminal_match_tol = 0.5;
  // 0 selects the game's maximum episode length.
  int max_rollout_len = 0;
  nn::OptimizerKind optimizer = nn::OptimizerKind::kAdam;
  // Every member gets the same initialization and batch schedule. Only useful
  // for checking that identical members agree.
  bool shared_member_seed = false;

  void validate() const;
  std::string canonical_string() const;
};

// Per-dimension standardization. Standard deviations are floored at 1e-6.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;

  static constexpr double kMinStd = 1e-6;
  static NormStats fit(const std::vector<std::vector<double>>& rows);
  std::vector<double> normalize(std::span<const double> x) const;
  std::vector<double> denormalize(std::span<const double> z) const;
  // Network feature view: as normalize, but dimensions that were constant in
  // the fitted data are only centered, so off-data values are not amplified
  // by the floored scale.
  std::vector<double> features(std::span<const double> x) const;
  bool operator==(const NormStats&) const = default;
};

struct EnsembleNorms {
  NormStats state, action, delta, reward, observation;
  bool operator==(const EnsembleNorms&) const = default;
};

struct EnsembleMember {
  nn::Mlp transition;  // (state, action) -> normalized state delta
  nn::Mlp reward;      // (state, action) -> normalized per-player rewards
};

// Observation and legal-action predictor shared by all members.
struct SharedObsNet {
  nn::Mlp net;  // (state, player one-hot) -> (normalized obs, legality scores)
};

struct TrainingReport {
  std::size_t num_transitions = 0;
  bool full_batch_fallback = false;
  std::vector<double> final_transition_loss;
  std::vector<double> final_reward_loss;
  double final_observation_loss = 0.0;
};

// Arithmetic mean of member predictions, per component.
std::vector<double> mean_prediction(
    const std::vector<std::vector<double>>& member_predictions);

// Largest summed absolute difference between any two members' reward vectors.
double rho_from_predictions(
    const std::vector<std::vector<double>>& member_rewards);

class Ensemble {
 public:
  Ensemble(std::shared_ptr<const GameSchema> schema, EnsembleConfig cfg,
           EnsembleNorms norms, std::vector<EnsembleMember> members,
           SharedObsNet obs_net);

  int size() const { return static_cast<int>(members_.size()); }
  const EnsembleConfig& config() const { return cfg_; }
  const EnsembleNorms& norms() const { return norms_; }
  const GameSchema& schema() const { return *schema_; }
  std::shared_ptr<const GameSchema> schema_ptr() const { return schema_; }
  const std::vector<EnsembleMember>& members() const { return members_; }
  const SharedObsNet& obs_net() const { return obs_net_; }

  std::vector<std::vector<double>> member_rewards(std::span<const double> state,
                                                  ActionId action) const;
  std::vector<std::vector<double>> member_deltas(std::span<const double> state,
                                                 ActionId action) const;
  std::vector<double> mean_reward(std::span<const double> state,
                                  ActionId action) const;
  double rho(std::span<const double> state, ActionId action) const;

  struct ObsPrediction {
    std::vector<double> observation;
    LegalMask legal;
  };
  ObsPrediction predict_observation(std::span<const double> state,
                                    int player) const;

  // Normalized (state, action) network input.
  std::vector<double> model_input(std::span<const double> state,
                                  ActionId action) const;

  nlohmann::json to_json() const;
  static Ensemble from_json(const nlohmann::json& j,
                            std::shared_ptr<const GameSchema> schema);

 private:
  std::shared_ptr<const GameSchema> schema_;
  EnsembleConfig cfg_;
  EnsembleNorms norms_;
  std::vector<EnsembleMember> members_;
  SharedObsNet obs_net_;
};

// Fits K members (independent initializations and minibatch streams) with
// mean-squared error, plus one shared observation/legality network.
Ensemble train_ensemble(const Dataset& dataset,
                        std::shared_ptr<const GameSchema> schema,
                        const EnsembleConfig& cfg, std::uint64_t seed,
                        TrainingReport* report = nullptr);

void save_ensemble(const std::filesystem::path& path, const Ensemble& ensemble);
Ensemble load_ensemble(const std::filesystem::path& path,
                       std::shared_ptr<const GameSchema> schema);

struct ModelStep {
  State next_state;
  std::vector<double> rewards;  // ensemble mean
  std::vector<std::vector<double>> member_rewards;
  double rho = 0.0;
  bool done = false;
};

// The learned model exposed as a game. Transitions follow the ensemble-mean
// state delta; episodes end when the predicted state is within
// terminal_match_tol (mean absolute difference) of the terminal vector.
class ModelMdp final : public StochasticGame {
 public:
  ModelMdp(std::shared_ptr<const Ensemble> ensemble,
           std::vector<State> initial_states);
  // Initial states are the first states of the dataset's trajectories.
  ModelMdp(std::shared_ptr<const Ensemble> ensemble, const Dataset& dataset);

  const Ensemble& ensemble() const { return *ensemble_; }
  std::shared_ptr<const Ensemble> ensemble_ptr() const { return ensemble_; }

  int num_players() const override { return schema().num_players(); }
  double discount() const override { return schema().discount(); }
  int num_actions() const override { return schema().num_actions(); }
  int state_size() const override { return schema().state_size(); }
  int observation_size() const override { return schema().observation_size(); }
  int infostate_size() const override { return schema().infostate_size(); }
  int max_episode_length() const override { return max_len_; }
  State terminal_state_vector() const override {
    return schema().terminal_state_vector();
  }
  int acting_player_from_vector(std::span<const double> state) const override {
    return schema().acting_player_from_vector(state);
  }
  std::vector<double> encode_infostate(std::span<const double> observation,
                                       std::span<const ActionId> history,
                                       int player) const override;
  std::vector<double> action_features(ActionId action) const override {
    return schema().action_features(action);
  }
  int action_feature_size() const override {
    return schema().action_feature_size();
  }
  std::string config_hash() const override;

  State initial_state(Rng& rng) const override;
  StepResult step(const State& state, ActionId action) const override;
  std::vector<ActionId> legal_actions(const State& state) const override;
  std::vector<double> observe(const State& state, int player) const override;

  ModelStep step_members(const State& state, ActionId action) const;
  double rho(std::span<const double> state, ActionId action) const {
    return ensemble_->rho(state, action);
  }
  // Mean absolute difference to the terminal vector is below the tolerance.
  bool matches_terminal(std::span<const double> state) const;

 private:
  const GameSchema& schema() const { return ensemble_->schema(); }

  std::shared_ptr<const Ensemble> ensemble_;
  std::vector<State> initial_states_;
  int max_len_;
};

struct ModelRollout {
  Trajectory trajectory;
  // per_member_returns[j][i]: sum of member j's reward predictions for
  // player i along the trajectory.
  std::vector<std::vector<double>> per_member_returns;
  std::vector<double> rho_per_step;
};

ModelRollout model_rollout(const ModelMdp& model,
                           std::span<const PolicyPtr> joint, Rng& rng,
                           int max_steps = 0);

}  // namespace opsro

#endif  // OPSRO_DYNAMICS_MODEL_HPP_
