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

#include "opsro/psro_driver.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace opsro {

void BcConfig::validate() const {
  if (hidden_width < 1 || depth < 1 || batch_size < 1 || training_steps < 1)
    throw std::invalid_argument("bc: counts must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("bc: lr <= 0");
}

std::string BcConfig::canonical_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "bc;width=" << hidden_width << ";depth=" << depth
     << ";lr=" << learning_rate << ";batch=" << batch_size
     << ";steps=" << training_steps << ";opt=" << nn::optimizer_name(optimizer);
  return os.str();
}

namespace {

// Softmax restricted to legal entries of one output column.
std::vector<double> masked_softmax(const float* logits, const LegalMask& legal) {
  std::vector<double> p(legal.size(), 0.0);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < legal.size(); ++a)
    if (legal[a]) top = std::max(top, static_cast<double>(logits[a]));
  if (!std::isfinite(top)) throw std::invalid_argument("no legal actions");
  double total = 0.0;
  for (std::size_t a = 0; a < legal.size(); ++a)
    if (legal[a]) total += (p[a] = std::exp(logits[a] - top));
  for (auto& x : p) x /= total;
  return p;
}

}  // namespace

BehaviorClonePolicy::BehaviorClonePolicy(nn::Mlp network, std::string config_hash)
    : network_(std::move(network)), config_hash_(std::move(config_hash)) {}

std::vector<double> BehaviorClonePolicy::action_probabilities(
    std::span<const double> infostate, const LegalMask& legal) const {
  const nn::Vector logits = network_.forward(infostate);
  if (logits.size() != static_cast<Eigen::Index>(legal.size()))
    throw std::invalid_argument("BehaviorClonePolicy: mask size mismatch");
  return masked_softmax(logits.data(), legal);
}

nlohmann::json BehaviorClonePolicy::to_json() const {
  return {{"kind", "bc"},
          {"config_hash", config_hash_},
          {"network", network_.to_json()}};
}

std::shared_ptr<BehaviorClonePolicy> BehaviorClonePolicy::from_json(
    const nlohmann::json& j) {
  return std::make_shared<BehaviorClonePolicy>(
      nn::Mlp::from_json(j.at("network")), j.at("config_hash").get<std::string>());
}

MixedPolicy::MixedPolicy(PolicyPtr trained, PolicyPtr cloned, double alpha)
    : trained_(std::move(trained)), cloned_(std::move(cloned)), alpha_(alpha) {
  if (!trained_ || !cloned_) throw std::invalid_argument("MixedPolicy: null policy");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("MixedPolicy: alpha outside [0, 1]");
}

std::vector<double> MixedPolicy::action_probabilities(
    std::span<const double> infostate, const LegalMask& legal) const {
  if (alpha_ == 0.0) return trained_->action_probabilities(infostate, legal);
  if (alpha_ == 1.0) return cloned_->action_probabilities(infostate, legal);
  auto p = trained_->action_probabilities(infostate, legal);
  const auto q = cloned_->action_probabilities(infostate, legal);
  for (std::size_t a = 0; a < p.size(); ++a)
    p[a] = (1.0 - alpha_) * p[a] + alpha_ * q[a];
  return p;
}

ActionId MixedPolicy::act(std::span<const double> infostate,
                          const LegalMask& legal, Rng& rng) const {
  if (alpha_ == 0.0) return trained_->act(infostate, legal, rng);
  if (alpha_ == 1.0) return cloned_->act(infostate, legal, rng);
  const bool use_clone = uniform01(rng) < alpha_;
  return (use_clone ? cloned_ : trained_)->act(infostate, legal, rng);
}

bool MixedPolicy::deterministic() const {
  if (alpha_ == 0.0) return trained_->deterministic();
  if (alpha_ == 1.0) return cloned_->deterministic();
  return false;
}

PolicyPtr mix_policy(PolicyPtr trained, PolicyPtr cloned, double alpha) {
  return std::make_shared<MixedPolicy>(std::move(trained), std::move(cloned),
                                       alpha);
}

std::shared_ptr<BehaviorClonePolicy> train_behavior_clone(
    const Dataset& dataset, const GameSchema& schema, const BcConfig& cfg,
    Rng& rng) {
  cfg.validate();
  std::vector<std::vector<double>> inputs;
  std::vector<ActionId> labels;
  std::vector<const LegalMask*> masks;
  for (const auto& traj : dataset.trajectories) {
    std::vector<ActionId> history;
    for (const auto& step : traj.steps) {
      inputs.push_back(
          schema.encode_infostate(step.observation, history, step.acting_player));
      labels.push_back(step.action);
      masks.push_back(&step.legal_mask);
      history.push_back(step.action);
    }
  }
  if (inputs.empty())
    throw std::invalid_argument("train_behavior_clone: empty dataset");

  nn::Mlp net({schema.infostate_size(), cfg.hidden_width, cfg.depth,
               schema.num_actions()},
              rng);
  nn::Trainer trainer(net, {cfg.optimizer, cfg.learning_rate});
  const std::size_t count = inputs.size();
  const std::size_t batch = std::min<std::size_t>(cfg.batch_size, count);
  std::uniform_int_distribution<std::size_t> pick(0, count - 1);
  std::vector<std::size_t> rows(batch);
  for (int it = 0; it < cfg.training_steps; ++it) {
    if (batch == count) {
      std::iota(rows.begin(), rows.end(), 0);
    } else {
      for (auto& r : rows) r = pick(rng);
    }
    nn::Matrix x(schema.infostate_size(), batch);
    for (std::size_t c = 0; c < batch; ++c)
      for (std::size_t r = 0; r < inputs[rows[c]].size(); ++r)
        x(r, c) = static_cast<float>(inputs[rows[c]][r]);
    trainer.step(x, [&](const nn::Matrix& out, nn::Matrix& grad) {
      grad.setZero(out.rows(), out.cols());
      float loss = 0.0f;
      for (std::size_t c = 0; c < batch; ++c) {
        const auto& legal = *masks[rows[c]];
        const auto p = masked_softmax(out.col(c).data(), legal);
        const ActionId y = labels[rows[c]];
        loss -= static_cast<float>(std::log(std::max(p[y], 1e-12)));
        for (std::size_t a = 0; a < legal.size(); ++a)
          grad(a, c) = static_cast<float>((p[a] - (a == static_cast<std::size_t>(y)))
                                          / batch);
      }
      return loss / batch;
    });
  }
  return std::make_shared<BehaviorClonePolicy>(std::move(net),
                                               cfg.canonical_string());
}

Algorithm parse_algorithm(const std::string& name) {
  std::string up = name;
  for (auto& c : up) c = static_cast<char>(c == '-' ? '_' : std::toupper(c));
  if (up == "PSRO") return Algorithm::kPsro;
  if (up == "COFFEE") return Algorithm::kCoffee;
  if (up == "OEF") return Algorithm::kOef;
  if (up == "OEF_BC") return Algorithm::kOefBc;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::string algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kPsro: return "PSRO";
    case Algorithm::kCoffee: return "COFFEE";
    case Algorithm::kOef: return "OEF";
    case Algorithm::kOefBc: return "OEF_BC";
  }
  return "?";
}

void RunConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("run: iterations < 0");
  if (simulations_per_entry < 1)
    throw std::invalid_argument("run: simulations_per_entry < 1");
  mss.validate();
  ddqn.validate();
  if (algorithm == Algorithm::kCoffee) {
    ObjectiveConfig{penalty_weight, alpha_init, anneal_steps, objective_mode}
        .validate();
  } else if (penalty_weight != 0.0 || alpha_init != 0.0) {
    throw std::invalid_argument(
        "run: penalty and coverage weights apply to COFFEE only");
  }
  if (algorithm == Algorithm::kOefBc) {
    if (!(alpha_bc >= 0.0 && alpha_bc <= 1.0))
      throw std::invalid_argument("run: alpha_bc outside [0, 1]");
    bc.validate();
  } else if (alpha_bc != 0.0) {
    throw std::invalid_argument("run: alpha_bc applies to OEF_BC only");
  }
  if (algorithm != Algorithm::kPsro) model.validate();
}

namespace {

struct LoopSettings {
  double penalty_weight = 0.0;
  double alpha_init = 0.0;
  ObjectiveMode mode = ObjectiveMode::kPlain;
};

double mean_of(const std::vector<double>& v, std::size_t from) {
  if (from >= v.size()) return 0.0;
  return std::accumulate(v.begin() + from, v.end(), 0.0) / (v.size() - from);
}

RunArtifacts psro_loop(const StochasticGame& env, const PenaltyFn& penalty,
                       const PayoffEstimator& estimator,
                       const LoopSettings& loop, const RunConfig& cfg,
                       Rng& rng) {
  RunArtifacts out;
  out.algorithm = cfg.algorithm;
  out.game = EmpiricalGame(cfg.simulations_per_entry);
  PolicyPtr initial = std::make_shared<UniformRandomPolicy>();
  out.game.extend(initial, estimator, rng);
  out.strategies.push_back(initial);
  out.profiles.push_back(MixedStrategy::one_hot(1, 0));

  for (int s = 1; s <= cfg.iterations; ++s) {
    IterationMetrics m;
    m.iteration = s;
    m.alpha = loop.alpha_init > 0.0
                  ? anneal_alpha(loop.alpha_init, cfg.anneal_steps, s - 1)
                  : 0.0;
    m.penalty_weight = loop.penalty_weight;
    const ObjectiveConfig objective{loop.penalty_weight, m.alpha,
                                    cfg.anneal_steps, loop.mode};
    BestResponseStats stats;
    auto br = train_best_response(env, penalty, out.strategies,
                                  out.profiles.back(), objective, cfg.ddqn, rng,
                                  &stats);
    m.br_episodes = stats.episodes;
    m.br_coverage_episodes = stats.coverage_episodes;
    m.br_loss = stats.last_loss;

    const std::size_t rho_before = out.game.rho_log().size();
    m.entries_simulated = out.game.extend(br, estimator, rng);
    m.mean_rho = mean_of(out.game.rho_log(), rho_before);
    out.strategies.push_back(br);

    const SolveResult solved = solve(to_bounded_nfg(out.game), cfg.mss);
    m.stop_reason = solved.stop_reason;
    m.solver_steps = solved.steps_taken;
    m.solver_metric = solved.final_metric;
    out.profiles.push_back(solved.profile);
    out.metrics.push_back(m);
    std::clog << "[" << algorithm_name(cfg.algorithm) << "] iteration " << s
              << "/" << cfg.iterations << " alpha=" << m.alpha
              << " mean_rho=" << m.mean_rho
              << " mss=" << stop_reason_name(m.stop_reason) << "\n";
  }
  return out;
}

RunArtifacts offline_loop(std::shared_ptr<const ModelMdp> model,
                          const LoopSettings& loop, const RunConfig& cfg,
                          Rng& rng) {
  if (!model) throw std::invalid_argument("offline loop: null model");
  const ModelPayoffEstimator estimator(model);
  const ModelMdp* raw = model.get();
  PenaltyFn penalty = [raw](std::span<const double> state, ActionId action) {
    return raw->rho(state, action);
  };
  RunArtifacts out = psro_loop(*model, penalty, estimator, loop, cfg, rng);
  out.ensemble = model->ensemble_ptr();
  return out;
}

void check_dataset(const Dataset& dataset, const GameSchema& schema) {
  if (dataset.trajectories.empty())
    throw std::invalid_argument("offline run: empty dataset");
  if (dataset.metadata.game_config_hash != schema.config_hash())
    throw ArtifactError("dataset was generated for a different game (hash " +
                        dataset.metadata.game_config_hash + " vs " +
                        schema.config_hash() + ")");
}

std::shared_ptr<const ModelMdp> fit_model(const Dataset& dataset,
                                          std::shared_ptr<const GameSchema> schema,
                                          const RunConfig& cfg, Rng& rng,
                                          TrainingReport* report) {
  check_dataset(dataset, *schema);
  const std::uint64_t model_seed = rng();
  auto ensemble = std::make_shared<const Ensemble>(
      train_ensemble(dataset, schema, cfg.model, model_seed, report));
  return std::make_shared<const ModelMdp>(ensemble, dataset);
}

}  // namespace

RunArtifacts run_psro(std::shared_ptr<const StochasticGame> true_game,
                      const RunConfig& cfg, Rng& rng) {
  if (!true_game) throw std::invalid_argument("run_psro: null game");
  cfg.validate();
  const TrueGamePayoffEstimator estimator(true_game);
  return psro_loop(*true_game, PenaltyFn{}, estimator, LoopSettings{}, cfg, rng);
}

RunArtifacts run_coffee_on_model(std::shared_ptr<const ModelMdp> model,
                                 const RunConfig& cfg, Rng& rng) {
  cfg.validate();
  LoopSettings loop{cfg.penalty_weight, cfg.alpha_init, cfg.objective_mode};
  return offline_loop(std::move(model), loop, cfg, rng);
}

RunArtifacts run_oef_on_model(std::shared_ptr<const ModelMdp> model,
                              const RunConfig& cfg, Rng& rng) {
  RunConfig plain = cfg;
  plain.penalty_weight = 0.0;
  plain.alpha_init = 0.0;
  plain.alpha_bc = 0.0;
  plain.validate();
  return offline_loop(std::move(model), LoopSettings{}, plain, rng);
}

RunArtifacts run_coffee(const Dataset& dataset,
                        std::shared_ptr<const GameSchema> schema,
                        const RunConfig& cfg, Rng& rng) {
  cfg.validate();
  TrainingReport report;
  auto model = fit_model(dataset, std::move(schema), cfg, rng, &report);
  RunArtifacts out = run_coffee_on_model(model, cfg, rng);
  out.model_report = std::move(report);
  return out;
}

RunArtifacts run_oef(const Dataset& dataset,
                     std::shared_ptr<const GameSchema> schema,
                     const RunConfig& cfg, Rng& rng) {
  TrainingReport report;
  auto model = fit_model(dataset, std::move(schema), cfg, rng, &report);
  RunArtifacts out = run_oef_on_model(model, cfg, rng);
  out.algorithm = cfg.algorithm;
  out.model_report = std::move(report);
  return out;
}

void apply_behavior_clone(RunArtifacts& artifacts,
                          std::shared_ptr<const BehaviorClonePolicy> clone,
                          double alpha_bc) {
  for (auto& s : artifacts.strategies) s = mix_policy(s, clone, alpha_bc);
  artifacts.behavior_clone = std::move(clone);
}

RunArtifacts run_oef_bc(const Dataset& dataset,
                        std::shared_ptr<const GameSchema> schema,
                        const RunConfig& cfg, Rng& rng) {
  cfg.validate();
  RunArtifacts out = run_oef(dataset, schema, cfg, rng);
  // A separate stream keeps the main loop identical to plain OEF.
  Rng bc_rng(derive_seed(cfg.seed, 0xbc));
  auto clone = train_behavior_clone(dataset, *schema, cfg.bc, bc_rng);
  apply_behavior_clone(out, std::move(clone), cfg.alpha_bc);
  out.algorithm = Algorithm::kOefBc;
  return out;
}

RunArtifacts run_algorithm(const Dataset* dataset,
                           std::shared_ptr<const StochasticGame> true_game,
                           const RunConfig& cfg, Rng& rng) {
  if (cfg.algorithm == Algorithm::kPsro) return run_psro(true_game, cfg, rng);
  if (!dataset) throw std::invalid_argument("offline algorithm needs a dataset");
  if (!true_game) throw std::invalid_argument("need the game layout");
  switch (cfg.algorithm) {
    case Algorithm::kCoffee: return run_coffee(*dataset, true_game, cfg, rng);
    case Algorithm::kOef: return run_oef(*dataset, true_game, cfg, rng);
    case Algorithm::kOefBc: return run_oef_bc(*dataset, true_game, cfg, rng);
    default: break;
  }
  throw std::invalid_argument("unknown algorithm");
}

Dataset generate_profile_mixture_dataset(const StochasticGame& game,
                                         std::span<const BehaviorProfile> profiles,
                                         int count, std::uint64_t seed,
                                         const std::string& behavior_tag) {
  if (count < 1) throw std::invalid_argument("dataset size must be >= 1");
  if (profiles.empty())
    throw std::invalid_argument("profile mixture needs at least one profile");
  for (const auto& p : profiles)
    if (p.weights.size() != static_cast<int>(p.strategies.size()) ||
        !p.weights.valid(1e-6))
      throw std::invalid_argument("behavior profile weights are invalid");
  Dataset data;
  data.metadata = {behavior_tag, seed, game.config_hash()};
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, profiles.size() - 1);
  data.trajectories.reserve(count);
  for (int k = 0; k < count; ++k) {
    const auto& profile = profiles[pick(rng)];
    std::vector<PolicyPtr> joint;
    for (int p = 0; p < game.num_players(); ++p)
      joint.push_back(profile.strategies[sample_action(profile.weights.weights, rng)]);
    data.trajectories.push_back(
        rollout(game, joint, rng, game.max_episode_length()));
  }
  return data;
}

}  // namespace opsro
