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

#include "opsro/evaluation.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>

#include "opsro/empirical_game.hpp"
#include "opsro/meta_solvers.hpp"

namespace opsro {

void ExactSearchConfig::validate() const {
  if (contexts < 1) throw std::invalid_argument("exact search: contexts < 1");
  if (opponent_samples < 1)
    throw std::invalid_argument("exact search: opponent_samples < 1");
  if (node_budget < 1) throw std::invalid_argument("exact search: budget < 1");
}

namespace {

constexpr std::uint64_t kCanonicalSeed = 0x5eedc0ffeeULL;

std::uint64_t hash_state(const State& s) {
  std::string bytes(s.size() * sizeof(double), '\0');
  std::memcpy(bytes.data(), s.data(), bytes.size());
  return fnv1a(bytes);
}

struct Hypothesis {
  State state;
  double decision_weight = 0.0;
  double eval_weight = 0.0;
  int strategy = 0;
};

struct Value {
  double decision = 0.0;
  double eval = 0.0;
};

class Searcher {
 public:
  Searcher(const StochasticGame& game, std::span<const PolicyPtr> opponents,
           int player, long long budget)
      : game_(game), opponents_(opponents), player_(player), budget_(budget) {}

  Value run(std::vector<Hypothesis> hyps, std::map<std::vector<ActionId>, ActionId>& plan) {
    plan_ = &plan;
    history_.clear();
    return search(std::move(hyps));
  }

 private:
  // Steps every hypothesis with `action` for the acting seat; returns the
  // immediate reward mass and the surviving children.
  Value expand(const std::vector<Hypothesis>& hyps,
               const std::vector<double>* scale, ActionId action,
               std::vector<Hypothesis>& children) {
    Value immediate;
    children.clear();
    for (std::size_t h = 0; h < hyps.size(); ++h) {
      const double f = scale ? (*scale)[h] : 1.0;
      if (f == 0.0) continue;
      StepResult r = game_.step(hyps[h].state, action);
      const double wd = hyps[h].decision_weight * f;
      const double we = hyps[h].eval_weight * f;
      immediate.decision += wd * r.rewards[player_];
      immediate.eval += we * r.rewards[player_];
      if (!r.done) children.push_back({std::move(r.next_state), wd, we, hyps[h].strategy});
    }
    return immediate;
  }

  Value search(std::vector<Hypothesis> hyps) {
    if (++nodes_ > budget_)
      throw SearchBudgetExceeded("exact search exceeded its node budget");
    std::erase_if(hyps, [](const Hypothesis& h) {
      return h.decision_weight == 0.0 && h.eval_weight == 0.0;
    });
    if (hyps.empty() ||
        static_cast<int>(history_.size()) >= game_.max_episode_length())
      return {};
    const int acting = game_.acting_player(hyps[0].state);
    for (const auto& h : hyps)
      if (game_.acting_player(h.state) != acting)
        throw std::logic_error("exact search: hypotheses disagree on the mover");
    const LegalMask legal = game_.legal_mask(hyps[0].state);
    std::vector<Hypothesis> children;

    if (acting == player_) {
      ActionId best = -1;
      Value best_value;
      for (ActionId a = 0; a < static_cast<ActionId>(legal.size()); ++a) {
        if (!legal[a]) continue;
        Value v = expand(hyps, nullptr, a, children);
        history_.push_back(a);
        const Value rest = search(std::move(children));
        history_.pop_back();
        v.decision += rest.decision;
        v.eval += rest.eval;
        if (best < 0 || v.decision > best_value.decision) {
          best = a;
          best_value = v;
        }
      }
      (*plan_)[history_] = best;
      return best_value;
    }

    // Opponent node: probability of each action under every hypothesis.
    std::vector<std::vector<double>> probs(hyps.size());
    for (std::size_t h = 0; h < hyps.size(); ++h) {
      const auto obs = game_.observe(hyps[h].state, acting);
      const auto info = game_.encode_infostate(obs, history_, acting);
      probs[h] = opponents_[hyps[h].strategy]->action_probabilities(
          info, game_.legal_mask(hyps[h].state));
    }
    Value total;
    std::vector<double> scale(hyps.size());
    for (ActionId a = 0; a < static_cast<ActionId>(legal.size()); ++a) {
      bool any = false;
      for (std::size_t h = 0; h < hyps.size(); ++h) {
        scale[h] = probs[h][a];
        any = any || scale[h] > 0.0;
      }
      if (!any) continue;
      Value v = expand(hyps, &scale, a, children);
      history_.push_back(a);
      const Value rest = search(std::move(children));
      history_.pop_back();
      total.decision += v.decision + rest.decision;
      total.eval += v.eval + rest.eval;
    }
    return total;
  }

  const StochasticGame& game_;
  std::span<const PolicyPtr> opponents_;
  int player_;
  long long budget_;
  long long nodes_ = 0;
  std::vector<ActionId> history_;
  std::map<std::vector<ActionId>, ActionId>* plan_ = nullptr;
};

}  // namespace

ExactBestResponsePolicy::ExactBestResponsePolicy(
    std::shared_ptr<const StochasticGame> game, std::vector<PolicyPtr> opponents,
    MixedStrategy opponent_mix, int player, ExactSearchConfig cfg)
    : game_(std::move(game)),
      opponents_(std::move(opponents)),
      mix_(std::move(opponent_mix)),
      player_(player),
      cfg_(cfg) {
  if (!game_) throw std::invalid_argument("exact search: null game");
  support_ = dynamic_cast<const ExactSearchSupport*>(game_.get());
  if (!support_)
    throw std::invalid_argument("exact search: game has no search support");
  if (game_->num_players() != 2)
    throw std::invalid_argument("exact search: two players only");
  if (player < 0 || player > 1)
    throw std::invalid_argument("exact search: bad player index");
  if (mix_.size() != static_cast<int>(opponents_.size()) || !mix_.valid(1e-6))
    throw std::invalid_argument("exact search: bad opponent mixture");
  cfg_.validate();
}

ExactBestResponsePolicy::ContextResult ExactBestResponsePolicy::solve_context(
    const State& root, bool evaluate_root) const {
  const int opponent = 1 - player_;
  Rng canon_rng(kCanonicalSeed);
  const State canonical = support_->resample_private(root, opponent, canon_rng);
  const std::uint64_t key = hash_state(canonical);

  std::vector<Hypothesis> hyps;
  Rng draw(derive_seed(cfg_.seed, key));
  const double m = cfg_.opponent_samples;
  for (int s = 0; s < cfg_.opponent_samples; ++s) {
    const State sample = support_->resample_private(root, opponent, draw);
    for (int k = 0; k < mix_.size(); ++k)
      if (mix_.weights[k] > 0.0) hyps.push_back({sample, mix_.weights[k] / m, 0.0, k});
  }
  double eval_mass = 0.0;
  if (evaluate_root) {
    for (int k = 0; k < mix_.size(); ++k)
      if (mix_.weights[k] > 0.0) {
        hyps.push_back({root, 0.0, mix_.weights[k], k});
        eval_mass += mix_.weights[k];
      }
  }
  double decision_mass = 0.0;
  for (const auto& h : hyps) decision_mass += h.decision_weight;

  Plan plan;
  Searcher searcher(*game_, opponents_, player_, cfg_.node_budget);
  const Value v = searcher.run(std::move(hyps), plan);
  ContextResult out;
  out.decision_value = v.decision / decision_mass;
  out.true_value = evaluate_root ? v.eval / eval_mass : 0.0;
  out.plan_size = plan.size();
  std::lock_guard<std::mutex> lock(mu_);
  plans_.try_emplace(key, std::move(plan));
  return out;
}

const ExactBestResponsePolicy::Plan& ExactBestResponsePolicy::plan_for(
    const State& root, std::uint64_t* key) const {
  Rng canon_rng(kCanonicalSeed);
  *key = hash_state(support_->resample_private(root, 1 - player_, canon_rng));
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = plans_.find(*key);
    if (it != plans_.end()) return it->second;
  }
  solve_context(root, false);
  std::lock_guard<std::mutex> lock(mu_);
  return plans_.at(*key);
}

ActionId ExactBestResponsePolicy::choose(std::span<const double> infostate,
                                         const LegalMask& legal) const {
  Rng root_rng(kCanonicalSeed);
  const State root = support_->root_from_infostate(infostate, player_, root_rng);
  std::uint64_t key = 0;
  const Plan& plan = plan_for(root, &key);
  const auto history = support_->history_from_infostate(infostate);
  auto it = plan.find(history);
  if (it != plan.end() && it->second >= 0 &&
      it->second < static_cast<ActionId>(legal.size()) && legal[it->second])
    return it->second;
  // Histories the search gave no weight to.
  for (ActionId a = 0; a < static_cast<ActionId>(legal.size()); ++a)
    if (legal[a]) return a;
  throw std::invalid_argument("exact policy: no legal actions");
}

std::vector<double> ExactBestResponsePolicy::action_probabilities(
    std::span<const double> infostate, const LegalMask& legal) const {
  std::vector<double> p(legal.size(), 0.0);
  p[choose(infostate, legal)] = 1.0;
  return p;
}

ActionId ExactBestResponsePolicy::act(std::span<const double> infostate,
                                      const LegalMask& legal, Rng&) const {
  return choose(infostate, legal);
}

ExactBestResponse exact_best_response(std::shared_ptr<const StochasticGame> game,
                                      std::span<const PolicyPtr> opponents,
                                      const MixedStrategy& opponent_mix,
                                      int player, const ExactSearchConfig& cfg) {
  auto policy = std::make_shared<const ExactBestResponsePolicy>(
      game, std::vector<PolicyPtr>(opponents.begin(), opponents.end()),
      opponent_mix, player, cfg);
  double sum = 0.0, sq = 0.0;
  for (int c = 0; c < cfg.contexts; ++c) {
    Rng ctx(derive_seed(cfg.seed ^ 0xc0417e47ULL, static_cast<std::uint64_t>(c)));
    const State root = game->initial_state(ctx);
    const double v = policy->solve_context(root, true).true_value;
    sum += v;
    sq += v * v;
  }
  ExactBestResponse out;
  out.policy = std::move(policy);
  out.value = sum / cfg.contexts;
  if (cfg.contexts > 1) {
    const double var =
        std::max(0.0, (sq - cfg.contexts * out.value * out.value) / (cfg.contexts - 1));
    out.std_error = std::sqrt(var / cfg.contexts);
  }
  return out;
}

double symmetric_best_response_value(std::shared_ptr<const StochasticGame> game,
                                     std::span<const PolicyPtr> opponents,
                                     const MixedStrategy& opponent_mix,
                                     const ExactSearchConfig& cfg) {
  ExactSearchConfig half = cfg;
  half.contexts = std::max(1, (cfg.contexts + 1) / 2);
  const double v0 =
      exact_best_response(game, opponents, opponent_mix, 0, half).value;
  half.seed = derive_seed(cfg.seed, 1);
  const double v1 =
      exact_best_response(game, opponents, opponent_mix, 1, half).value;
  return 0.5 * (v0 + v1);
}

OracleKind parse_oracle_kind(const std::string& name) {
  if (name == "none") return OracleKind::kNone;
  if (name == "ddqn_online") return OracleKind::kDdqnOnline;
  if (name == "exact_tree_search") return OracleKind::kExactTreeSearch;
  throw std::invalid_argument("unknown oracle '" + name + "'");
}

std::string oracle_kind_name(OracleKind kind) {
  switch (kind) {
    case OracleKind::kNone: return "none";
    case OracleKind::kDdqnOnline: return "ddqn_online";
    case OracleKind::kExactTreeSearch: return "exact_tree_search";
  }
  return "?";
}

void EvalConfig::validate() const {
  if (eval_window < 0) throw std::invalid_argument("eval: eval_window < 0");
  if (true_simulations < 1)
    throw std::invalid_argument("eval: true_simulations < 1");
  if (oracle == OracleKind::kExactTreeSearch) exact.validate();
  if (oracle == OracleKind::kDdqnOnline) ddqn.validate();
}

NormalFormGame true_payoff_matrix(std::span<const PolicyPtr> strategies,
                                  const std::vector<int>& columns,
                                  const StochasticGame& true_game,
                                  int num_simulations, Rng& rng) {
  const int m = static_cast<int>(strategies.size());
  TrueGamePayoffEstimator estimator(std::shared_ptr<const StochasticGame>(
      &true_game, [](const StochasticGame*) {}));
  std::map<std::pair<int, int>, PayoffEntry> table;
  for (int l : columns)
    for (int k = 0; k < m; ++k) table[{std::min(k, l), std::max(k, l)}];
  const std::uint64_t base = rng();
  for (auto& [key, entry] : table) {
    Rng pair_rng(derive_seed(base, static_cast<std::uint64_t>(key.first) * m + key.second));
    const PolicyPtr joint[2] = {strategies[key.first], strategies[key.second]};
    entry = estimator.estimate(joint, num_simulations, pair_rng, nullptr);
  }
  NormalFormGame g(2, {m, m});
  for (const auto& [key, entry] : table) {
    const auto& u = entry.mean_utilities;
    const int ab[2] = {key.first, key.second};
    const int ba[2] = {key.second, key.first};
    if (key.first == key.second) {
      auto p = g.payoffs(ab);
      p[0] = p[1] = 0.5 * (u[0] + u[1]);
    } else {
      auto p = g.payoffs(ab);
      p[0] = u[0];
      p[1] = u[1];
      auto q = g.payoffs(ba);
      q[0] = u[1];
      q[1] = u[0];
    }
  }
  return g;
}

namespace {

double ddqn_oracle_value(std::shared_ptr<const StochasticGame> game,
                         std::span<const PolicyPtr> opponents,
                         const MixedStrategy& sigma, const EvalConfig& cfg,
                         Rng& rng) {
  const ObjectiveConfig plain{0.0, 0.0, 10, ObjectiveMode::kPlain};
  PolicyPtr br = train_best_response(*game, {}, opponents, sigma, plain,
                                     cfg.ddqn, rng);
  TrueGamePayoffEstimator estimator(game);
  const int half = std::max(1, cfg.true_simulations / 2);
  double value = 0.0;
  for (int l = 0; l < sigma.size(); ++l) {
    if (sigma.weights[l] == 0.0) continue;
    const PolicyPtr first[2] = {br, opponents[l]};
    const PolicyPtr second[2] = {opponents[l], br};
    const double u0 = estimator.estimate(first, half, rng, nullptr).mean_utilities[0];
    const double u1 = estimator.estimate(second, half, rng, nullptr).mean_utilities[1];
    value += sigma.weights[l] * 0.5 * (u0 + u1);
  }
  return value;
}

}  // namespace

RegretReport true_game_regret(std::span<const PolicyPtr> strategies,
                              std::span<const MixedStrategy> profiles,
                              std::shared_ptr<const StochasticGame> true_game,
                              const EvalConfig& cfg, Rng& rng) {
  cfg.validate();
  if (!true_game) throw std::invalid_argument("true_game_regret: null game");
  if (true_game->num_players() != 2)
    throw std::invalid_argument("true_game_regret: two players only");
  const int m = static_cast<int>(strategies.size());
  if (profiles.empty() || m < 1)
    throw std::invalid_argument("true_game_regret: nothing to evaluate");

  std::vector<MixedStrategy> padded;
  std::vector<char> in_support(m, 0);
  for (const auto& p : profiles) {
    if (p.size() > m || !p.valid(1e-6))
      throw std::invalid_argument("true_game_regret: bad profile");
    MixedStrategy q = p;
    q.weights.resize(m, 0.0);
    for (int k = 0; k < m; ++k)
      if (q.weights[k] > 0.0) in_support[k] = 1;
    padded.push_back(std::move(q));
  }
  std::vector<int> columns;
  for (int k = 0; k < m; ++k)
    if (in_support[k]) columns.push_back(k);
  const NormalFormGame a =
      true_payoff_matrix(strategies, columns, *true_game, cfg.true_simulations, rng);

  RegretReport report;
  const int count = static_cast<int>(profiles.size());
  const int window_start = std::max(0, count - cfg.eval_window);
  for (int s = 0; s < count; ++s) {
    const MixedStrategy& sigma = padded[s];
    RegretRow row;
    row.iteration = s;
    const auto u = strategy_payoffs(a, sigma);
    row.profile_value = 0.0;
    for (int k = 0; k < m; ++k) row.profile_value += sigma.weights[k] * u[k];
    row.best_in_set = *std::max_element(u.begin(), u.end());
    double best = row.best_in_set;
    if (cfg.oracle != OracleKind::kNone && s >= window_start) {
      const int size = profiles[s].size();
      const std::span<const PolicyPtr> opponents = strategies.first(size);
      try {
        if (cfg.oracle == OracleKind::kExactTreeSearch) {
          ExactSearchConfig ex = cfg.exact;
          ex.seed = derive_seed(cfg.exact.seed, static_cast<std::uint64_t>(s));
          row.oracle_value = symmetric_best_response_value(true_game, opponents,
                                                           profiles[s], ex);
        } else {
          row.oracle_value =
              ddqn_oracle_value(true_game, opponents, profiles[s], cfg, rng);
        }
        row.oracle_used = true;
        ++report.oracle_strategy_count;
        best = std::max(best, row.oracle_value);
      } catch (const std::exception& e) {
        row.oracle_failed = true;
        row.failure = e.what();
      }
    }
    const double raw = best - row.profile_value;
    row.raw_summed_regret = 2.0 * raw;
    row.per_player.assign(2, std::max(0.0, raw));
    row.summed_regret = row.per_player[0] + row.per_player[1];
    report.rows.push_back(std::move(row));
  }
  return report;
}

RegretReport true_game_regret(const RunArtifacts& artifacts,
                              std::shared_ptr<const StochasticGame> true_game,
                              const EvalConfig& cfg, Rng& rng) {
  return true_game_regret(artifacts.strategies, artifacts.profiles,
                          std::move(true_game), cfg, rng);
}

double model_fidelity(const NormalFormGame& truth, const NormalFormGame& model) {
  if (truth.num_players() != model.num_players() ||
      truth.strategy_counts() != model.strategy_counts())
    throw std::invalid_argument("model_fidelity: game shapes differ");
  double total = 0.0;
  for (std::size_t k = 0; k < truth.num_profiles(); ++k) {
    const auto profile = truth.profile_at(k);
    const auto u = truth.payoffs(profile);
    const auto v = model.payoffs(profile);
    for (int i = 0; i < truth.num_players(); ++i) total += std::abs(u[i] - v[i]);
  }
  return total / truth.num_profiles();
}

double model_fidelity(std::span<const PolicyPtr> strategies,
                      std::shared_ptr<const ModelMdp> model,
                      const StochasticGame& true_game, int num_simulations,
                      Rng& rng) {
  const NormalFormGame truth =
      reconstruct_true(strategies, true_game, num_simulations, rng);
  EmpiricalGame learned(num_simulations);
  const ModelPayoffEstimator estimator(std::move(model));
  for (const auto& s : strategies) learned.extend(s, estimator, rng);
  return model_fidelity(truth, to_bounded_nfg(learned).mean);
}

double mean_rho(std::span<const double> rho_log) {
  if (rho_log.empty()) throw std::invalid_argument("mean_rho: empty log");
  return std::accumulate(rho_log.begin(), rho_log.end(), 0.0) / rho_log.size();
}

double mean_rho(const RunArtifacts& artifacts) {
  return mean_rho(artifacts.rho_log());
}

double welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("welch_t_test: need at least two samples each");
  auto moments = [](std::span<const double> x) {
    const double n = x.size();
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair<double, double>(mean, ss / (n - 1));
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double sa = va / a.size();
  const double sb = vb / b.size();
  if (sa + sb == 0.0) return ma == mb ? 1.0 : 0.0;
  const double t = std::abs(ma - mb) / std::sqrt(sa + sb);
  const double df =
      (sa + sb) * (sa + sb) / (sa * sa / (a.size() - 1) + sb * sb / (b.size() - 1));
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
}

}  // namespace opsro
