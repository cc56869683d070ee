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

#include "opsro/dynamics_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace opsro {

using nlohmann::json;

void EnsembleConfig::validate() const {
  if (ensemble_size < 2)
    throw std::invalid_argument("ensemble_size must be >= 2");
  if (hidden_width < 1 || depth < 1 || batch_size < 1 || training_steps < 1)
    throw std::invalid_argument("ensemble counts must be positive");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("learning_rate must be positive");
  if (terminal_match_tol < 0.0 || max_rollout_len < 0)
    throw std::invalid_argument("bad terminal tolerance or rollout length");
}

std::string EnsembleConfig::canonical_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "ensemble;K=" << ensemble_size << ";width=" << hidden_width
     << ";depth=" << depth << ";batch=" << batch_size
     << ";lr=" << learning_rate << ";steps=" << training_steps
     << ";tol=" << terminal_match_tol << ";len=" << max_rollout_len
     << ";opt=" << nn::optimizer_name(optimizer)
     << ";shared=" << shared_member_seed;
  return os.str();
}

NormStats NormStats::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw std::invalid_argument("NormStats::fit: no rows");
  const std::size_t d = rows[0].size();
  NormStats s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (const auto& r : rows)
    for (std::size_t k = 0; k < d; ++k) s.mean[k] += r.at(k);
  for (auto& m : s.mean) m /= static_cast<double>(rows.size());
  for (const auto& r : rows)
    for (std::size_t k = 0; k < d; ++k)
      s.stddev[k] += (r[k] - s.mean[k]) * (r[k] - s.mean[k]);
  for (auto& v : s.stddev)
    v = std::max(std::sqrt(v / static_cast<double>(rows.size())), kMinStd);
  return s;
}

std::vector<double> NormStats::normalize(std::span<const double> x) const {
  std::vector<double> z(x.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    z[k] = (x[k] - mean.at(k)) / stddev[k];
  return z;
}

std::vector<double> NormStats::features(std::span<const double> x) const {
  auto z = normalize(x);
  for (std::size_t k = 0; k < z.size(); ++k)
    if (stddev[k] <= kMinStd) z[k] = x[k] - mean[k];
  return z;
}

std::vector<double> NormStats::denormalize(std::span<const double> z) const {
  std::vector<double> x(z.size());
  for (std::size_t k = 0; k < z.size(); ++k)
    x[k] = z[k] * stddev.at(k) + mean[k];
  return x;
}

std::vector<double> mean_prediction(
    const std::vector<std::vector<double>>& member_predictions) {
  if (member_predictions.empty())
    throw std::invalid_argument("mean_prediction: no members");
  std::vector<double> out(member_predictions[0].size(), 0.0);
  for (const auto& p : member_predictions)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += p.at(i);
  for (auto& x : out) x /= static_cast<double>(member_predictions.size());
  return out;
}

double rho_from_predictions(
    const std::vector<std::vector<double>>& member_rewards) {
  double best = 0.0;
  for (std::size_t j = 0; j < member_rewards.size(); ++j) {
    for (std::size_t k = j + 1; k < member_rewards.size(); ++k) {
      double gap = 0.0;
      for (std::size_t i = 0; i < member_rewards[j].size(); ++i)
        gap += std::fabs(member_rewards[j][i] - member_rewards[k].at(i));
      best = std::max(best, gap);
    }
  }
  return best;
}

namespace {

json norm_to_json(const NormStats& s) {
  return {{"mean", s.mean}, {"std", s.stddev}};
}
NormStats norm_from_json(const json& j) {
  return {j.at("mean").get<std::vector<double>>(),
          j.at("std").get<std::vector<double>>()};
}

std::vector<double> to_doubles(const nn::Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

Ensemble::Ensemble(std::shared_ptr<const GameSchema> schema, EnsembleConfig cfg,
                   EnsembleNorms norms, std::vector<EnsembleMember> members,
                   SharedObsNet obs_net)
    : schema_(std::move(schema)),
      cfg_(std::move(cfg)),
      norms_(std::move(norms)),
      members_(std::move(members)),
      obs_net_(std::move(obs_net)) {
  if (!schema_) throw std::invalid_argument("Ensemble: null schema");
  if (members_.empty()) throw std::invalid_argument("Ensemble: no members");
}

std::vector<double> Ensemble::model_input(std::span<const double> state,
                                          ActionId action) const {
  auto in = norms_.state.features(state);
  const auto feat = norms_.action.features(schema_->action_features(action));
  in.insert(in.end(), feat.begin(), feat.end());
  return in;
}

std::vector<std::vector<double>> Ensemble::member_rewards(
    std::span<const double> state, ActionId action) const {
  const auto in = model_input(state, action);
  std::vector<std::vector<double>> out;
  out.reserve(members_.size());
  for (const auto& m : members_)
    out.push_back(norms_.reward.denormalize(to_doubles(m.reward.forward(in))));
  return out;
}

std::vector<std::vector<double>> Ensemble::member_deltas(
    std::span<const double> state, ActionId action) const {
  const auto in = model_input(state, action);
  std::vector<std::vector<double>> out;
  out.reserve(members_.size());
  for (const auto& m : members_)
    out.push_back(
        norms_.delta.denormalize(to_doubles(m.transition.forward(in))));
  return out;
}

std::vector<double> Ensemble::mean_reward(std::span<const double> state,
                                          ActionId action) const {
  return mean_prediction(member_rewards(state, action));
}

double Ensemble::rho(std::span<const double> state, ActionId action) const {
  return rho_from_predictions(member_rewards(state, action));
}

Ensemble::ObsPrediction Ensemble::predict_observation(
    std::span<const double> state, int player) const {
  auto in = norms_.state.features(state);
  for (int p = 0; p < schema_->num_players(); ++p)
    in.push_back(p == player ? 1.0 : 0.0);
  const auto out = to_doubles(obs_net_.net.forward(in));
  const int obs_size = schema_->observation_size();
  ObsPrediction pred;
  pred.observation = norms_.observation.denormalize(
      std::span<const double>(out.data(), obs_size));
  const int num_actions = schema_->num_actions();
  pred.legal.assign(num_actions, 0);
  int best = 0;
  bool any = false;
  for (int a = 0; a < num_actions; ++a) {
    const double score = out[obs_size + a];
    if (score > 0.0) {
      pred.legal[a] = 1;
      any = true;
    }
    if (score > out[obs_size + best]) best = a;
  }
  if (!any) pred.legal[best] = 1;
  return pred;
}

json Ensemble::to_json() const {
  json members = json::array();
  for (const auto& m : members_)
    members.push_back(
        {{"transition", m.transition.to_json()}, {"reward", m.reward.to_json()}});
  return {{"config",
           {{"ensemble_size", cfg_.ensemble_size},
            {"hidden_width", cfg_.hidden_width},
            {"depth", cfg_.depth},
            {"batch_size", cfg_.batch_size},
            {"learning_rate", cfg_.learning_rate},
            {"training_steps", cfg_.training_steps},
            {"terminal_match_tol", cfg_.terminal_match_tol},
            {"max_rollout_len", cfg_.max_rollout_len},
            {"optimizer", nn::optimizer_name(cfg_.optimizer)},
            {"shared_member_seed", cfg_.shared_member_seed}}},
          {"config_hash", schema_->config_hash()},
          {"norms",
           {{"state", norm_to_json(norms_.state)},
            {"action", norm_to_json(norms_.action)},
            {"delta", norm_to_json(norms_.delta)},
            {"reward", norm_to_json(norms_.reward)},
            {"observation", norm_to_json(norms_.observation)}}},
          {"members", members},
          {"obs_net", obs_net_.net.to_json()}};
}

Ensemble Ensemble::from_json(const json& j,
                             std::shared_ptr<const GameSchema> schema) {
  if (j.at("config_hash").get<std::string>() != schema->config_hash())
    throw ArtifactError("ensemble checkpoint was trained on another game");
  const auto& c = j.at("config");
  EnsembleConfig cfg;
  cfg.ensemble_size = c.at("ensemble_size").get<int>();
  cfg.hidden_width = c.at("hidden_width").get<int>();
  cfg.depth = c.at("depth").get<int>();
  cfg.batch_size = c.at("batch_size").get<int>();
  cfg.learning_rate = c.at("learning_rate").get<double>();
  cfg.training_steps = c.at("training_steps").get<int>();
  cfg.terminal_match_tol = c.at("terminal_match_tol").get<double>();
  cfg.max_rollout_len = c.at("max_rollout_len").get<int>();
  cfg.optimizer = nn::parse_optimizer(c.at("optimizer").get<std::string>());
  cfg.shared_member_seed = c.at("shared_member_seed").get<bool>();
  const auto& n = j.at("norms");
  EnsembleNorms norms{norm_from_json(n.at("state")),
                      norm_from_json(n.at("action")),
                      norm_from_json(n.at("delta")),
                      norm_from_json(n.at("reward")),
                      norm_from_json(n.at("observation"))};
  std::vector<EnsembleMember> members;
  for (const auto& m : j.at("members"))
    members.push_back({nn::Mlp::from_json(m.at("transition")),
                       nn::Mlp::from_json(m.at("reward"))});
  return Ensemble(std::move(schema), cfg, std::move(norms), std::move(members),
                  {nn::Mlp::from_json(j.at("obs_net"))});
}

void save_ensemble(const std::filesystem::path& path, const Ensemble& ensemble) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot open " + path.string());
  out << ensemble.to_json().dump() << '\n';
}

Ensemble load_ensemble(const std::filesystem::path& path,
                       std::shared_ptr<const GameSchema> schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot open " + path.string());
  try {
    return Ensemble::from_json(json::parse(in), std::move(schema));
  } catch (const json::exception& e) {
    throw ArtifactError(std::string("bad ensemble checkpoint: ") + e.what());
  }
}

namespace {

struct TransitionData {
  std::vector<std::vector<double>> states, actions, deltas, rewards;
  std::vector<std::vector<double>> obs_states, observations;
  std::vector<int> obs_players;
  std::vector<LegalMask> masks;
};

TransitionData extract_transitions(const Dataset& dataset,
                                   const GameSchema& schema) {
  TransitionData data;
  for (const auto& traj : dataset.trajectories) {
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      const auto& step = traj.steps[t];
      const State& next =
          t + 1 < traj.steps.size() ? traj.steps[t + 1].state : traj.final_state;
      if (next.size() != step.state.size())
        throw std::invalid_argument("train_ensemble: inconsistent state sizes");
      std::vector<double> delta(step.state.size());
      for (std::size_t d = 0; d < delta.size(); ++d)
        delta[d] = next[d] - step.state[d];
      data.states.push_back(step.state);
      data.actions.push_back(schema.action_features(step.action));
      data.deltas.push_back(std::move(delta));
      data.rewards.push_back(step.rewards);
      data.obs_states.push_back(step.state);
      data.observations.push_back(step.observation);
      data.obs_players.push_back(step.acting_player);
      data.masks.push_back(step.legal_mask);
    }
  }
  return data;
}

nn::Matrix gather(const std::vector<std::vector<double>>& columns,
                  const std::vector<std::size_t>& index) {
  nn::Matrix m(columns[0].size(), index.size());
  for (std::size_t c = 0; c < index.size(); ++c) {
    const auto& col = columns[index[c]];
    for (std::size_t r = 0; r < col.size(); ++r)
      m(r, c) = static_cast<float>(col[r]);
  }
  return m;
}

std::vector<std::size_t> draw_batch(std::size_t n, int batch_size,
                                    bool full_batch, Rng& rng) {
  std::vector<std::size_t> index;
  if (full_batch) {
    index.resize(n);
    for (std::size_t k = 0; k < n; ++k) index[k] = k;
    return index;
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  index.resize(batch_size);
  for (auto& k : index) k = pick(rng);
  return index;
}

}  // namespace

Ensemble train_ensemble(const Dataset& dataset,
                        std::shared_ptr<const GameSchema> schema,
                        const EnsembleConfig& cfg, std::uint64_t seed,
                        TrainingReport* report) {
  cfg.validate();
  if (!schema) throw std::invalid_argument("train_ensemble: null schema");
  const TransitionData data = extract_transitions(dataset, *schema);
  const std::size_t n = data.states.size();
  if (n == 0) throw std::invalid_argument("train_ensemble: empty dataset");
  const bool full_batch = n < static_cast<std::size_t>(cfg.batch_size);
  if (full_batch)
    std::clog << "[warn] train_ensemble: " << n << " transitions < batch size "
              << cfg.batch_size << "; training full-batch\n";

  EnsembleNorms norms;
  norms.state = NormStats::fit(data.states);
  norms.action = NormStats::fit(data.actions);
  norms.delta = NormStats::fit(data.deltas);
  norms.reward = NormStats::fit(data.rewards);
  norms.observation = NormStats::fit(data.observations);

  std::vector<std::vector<double>> inputs(n), delta_targets(n),
      reward_targets(n);
  for (std::size_t k = 0; k < n; ++k) {
    inputs[k] = norms.state.features(data.states[k]);
    const auto a = norms.action.features(data.actions[k]);
    inputs[k].insert(inputs[k].end(), a.begin(), a.end());
    delta_targets[k] = norms.delta.normalize(data.deltas[k]);
    reward_targets[k] = norms.reward.normalize(data.rewards[k]);
  }

  const int in_size = static_cast<int>(inputs[0].size());
  const nn::OptimizerConfig opt{cfg.optimizer, cfg.learning_rate};
  TrainingReport local;
  local.num_transitions = n;
  local.full_batch_fallback = full_batch;

  std::vector<EnsembleMember> members;
  for (int j = 0; j < cfg.ensemble_size; ++j) {
    Rng rng(derive_seed(seed, cfg.shared_member_seed ? 0 : j));
    EnsembleMember m{
        nn::Mlp({in_size, cfg.hidden_width, cfg.depth,
                 static_cast<int>(delta_targets[0].size())},
                rng),
        nn::Mlp({in_size, cfg.hidden_width, cfg.depth,
                 static_cast<int>(reward_targets[0].size())},
                rng)};
    nn::Trainer transition_trainer(m.transition, opt);
    nn::Trainer reward_trainer(m.reward, opt);
    float tl = 0.0f, rl = 0.0f;
    for (int step = 0; step < cfg.training_steps; ++step) {
      const auto batch = draw_batch(n, cfg.batch_size, full_batch, rng);
      const nn::Matrix x = gather(inputs, batch);
      const nn::Matrix yd = gather(delta_targets, batch);
      const nn::Matrix yr = gather(reward_targets, batch);
      tl = transition_trainer.step(x, [&](const nn::Matrix& out, nn::Matrix& g) {
        return nn::mse_loss(out, yd, g);
      });
      rl = reward_trainer.step(x, [&](const nn::Matrix& out, nn::Matrix& g) {
        return nn::mse_loss(out, yr, g);
      });
    }
    local.final_transition_loss.push_back(tl);
    local.final_reward_loss.push_back(rl);
    members.push_back(std::move(m));
  }

  // Shared observation / legality network.
  const int num_players = schema->num_players();
  const int num_actions = schema->num_actions();
  std::vector<std::vector<double>> obs_inputs(n), obs_targets(n);
  for (std::size_t k = 0; k < n; ++k) {
    obs_inputs[k] = norms.state.features(data.obs_states[k]);
    for (int p = 0; p < num_players; ++p)
      obs_inputs[k].push_back(p == data.obs_players[k] ? 1.0 : 0.0);
    obs_targets[k] = norms.observation.normalize(data.observations[k]);
    for (int a = 0; a < num_actions; ++a)
      obs_targets[k].push_back(data.masks[k].at(a) ? 1.0 : -1.0);
  }
  Rng obs_rng(derive_seed(seed, 1u << 20));
  SharedObsNet obs{nn::Mlp({static_cast<int>(obs_inputs[0].size()),
                            cfg.hidden_width, cfg.depth,
                            static_cast<int>(obs_targets[0].size())},
                           obs_rng)};
  nn::Trainer obs_trainer(obs.net, opt);
  for (int step = 0; step < cfg.training_steps; ++step) {
    const auto batch = draw_batch(n, cfg.batch_size, full_batch, obs_rng);
    const nn::Matrix x = gather(obs_inputs, batch);
    const nn::Matrix y = gather(obs_targets, batch);
    local.final_observation_loss =
        obs_trainer.step(x, [&](const nn::Matrix& out, nn::Matrix& g) {
          return nn::mse_loss(out, y, g);
        });
  }

  if (report) *report = local;
  return Ensemble(std::move(schema), cfg, std::move(norms), std::move(members),
                  std::move(obs));
}

ModelMdp::ModelMdp(std::shared_ptr<const Ensemble> ensemble,
                   std::vector<State> initial_states)
    : ensemble_(std::move(ensemble)), initial_states_(std::move(initial_states)) {
  if (!ensemble_) throw std::invalid_argument("ModelMdp: null ensemble");
  if (initial_states_.empty())
    throw std::invalid_argument("ModelMdp: no initial states");
  max_len_ = ensemble_->config().max_rollout_len > 0
                 ? ensemble_->config().max_rollout_len
                 : schema().max_episode_length();
}

namespace {
std::vector<State> first_states(const Dataset& dataset) {
  std::vector<State> out;
  for (const auto& t : dataset.trajectories)
    if (!t.steps.empty()) out.push_back(t.steps.front().state);
  return out;
}
}  // namespace

ModelMdp::ModelMdp(std::shared_ptr<const Ensemble> ensemble,
                   const Dataset& dataset)
    : ModelMdp(std::move(ensemble), first_states(dataset)) {}

std::vector<double> ModelMdp::encode_infostate(
    std::span<const double> observation, std::span<const ActionId> history,
    int player) const {
  return schema().encode_infostate(observation, history, player);
}

std::string ModelMdp::config_hash() const {
  return hex64(fnv1a(ensemble_->config().canonical_string(),
                     fnv1a(schema().config_hash())));
}

State ModelMdp::initial_state(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick(0, initial_states_.size() - 1);
  return initial_states_[pick(rng)];
}

bool ModelMdp::matches_terminal(std::span<const double> state) const {
  const State terminal = schema().terminal_state_vector();
  double total = 0.0;
  for (std::size_t d = 0; d < terminal.size(); ++d)
    total += std::fabs(state[d] - terminal[d]);
  return total / static_cast<double>(terminal.size()) <
         ensemble_->config().terminal_match_tol;
}

ModelStep ModelMdp::step_members(const State& state, ActionId action) const {
  if (is_terminal(state)) throw std::logic_error("step on a terminal state");
  ModelStep out;
  const auto in = ensemble_->model_input(state, action);
  const auto& norms = ensemble_->norms();
  std::vector<double> mean_delta(state.size(), 0.0);
  for (const auto& m : ensemble_->members()) {
    const auto d = norms.delta.denormalize(to_doubles(m.transition.forward(in)));
    for (std::size_t k = 0; k < d.size(); ++k) mean_delta[k] += d[k];
    out.member_rewards.push_back(
        norms.reward.denormalize(to_doubles(m.reward.forward(in))));
  }
  const double k_members = static_cast<double>(ensemble_->size());
  out.next_state = state;
  for (std::size_t k = 0; k < state.size(); ++k)
    out.next_state[k] += mean_delta[k] / k_members;
  out.rewards = mean_prediction(out.member_rewards);
  out.rho = rho_from_predictions(out.member_rewards);
  out.done = matches_terminal(out.next_state);
  if (out.done) out.next_state = schema().terminal_state_vector();
  return out;
}

StepResult ModelMdp::step(const State& state, ActionId action) const {
  ModelStep s = step_members(state, action);
  return {std::move(s.next_state), std::move(s.rewards), s.done};
}

std::vector<ActionId> ModelMdp::legal_actions(const State& state) const {
  if (is_terminal(state))
    throw std::logic_error("legal_actions on a terminal state");
  const int player = acting_player(state);
  return actions_from_mask(ensemble_->predict_observation(state, player).legal);
}

std::vector<double> ModelMdp::observe(const State& state, int player) const {
  return ensemble_->predict_observation(state, player).observation;
}

ModelRollout model_rollout(const ModelMdp& model,
                           std::span<const PolicyPtr> joint, Rng& rng,
                           int max_steps) {
  const int n = model.num_players();
  const int k_members = model.ensemble().size();
  if (static_cast<int>(joint.size()) != n)
    throw std::invalid_argument("model_rollout: joint size != num_players");
  if (max_steps <= 0) max_steps = model.max_episode_length();

  ModelRollout out;
  out.per_member_returns.assign(k_members, std::vector<double>(n, 0.0));
  Trajectory& traj = out.trajectory;
  traj.episode_return.assign(n, 0.0);
  State state = model.initial_state(rng);
  std::vector<ActionId> history;
  while (static_cast<int>(traj.steps.size()) < max_steps) {
    TrajectoryStep step;
    step.acting_player = model.acting_player(state);
    auto pred = model.ensemble().predict_observation(state, step.acting_player);
    step.observation = std::move(pred.observation);
    step.legal_mask = std::move(pred.legal);
    const auto infostate =
        model.encode_infostate(step.observation, history, step.acting_player);
    step.action =
        joint[step.acting_player]->act(infostate, step.legal_mask, rng);
    const int index = static_cast<int>(traj.steps.size());
    if (step.action < 0 ||
        step.action >= static_cast<int>(step.legal_mask.size()) ||
        !step.legal_mask[step.action])
      throw IllegalActionError("illegal action in model rollout", index);
    ModelStep result = model.step_members(state, step.action);
    for (int j = 0; j < k_members; ++j)
      for (int i = 0; i < n; ++i)
        out.per_member_returns[j][i] += result.member_rewards[j][i];
    out.rho_per_step.push_back(result.rho);
    for (int i = 0; i < n; ++i) traj.episode_return[i] += result.rewards[i];
    step.state = std::move(state);
    step.rewards = std::move(result.rewards);
    history.push_back(step.action);
    traj.steps.push_back(std::move(step));
    state = std::move(result.next_state);
    if (result.done) {
      traj.terminated = true;
      break;
    }
  }
  traj.final_state = std::move(state);
  return out;
}

}  // namespace opsro
