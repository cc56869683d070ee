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

#include "opsro/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace opsro {

namespace {

struct Field {
  std::string section;
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(const std::string& text) {
  std::istringstream is(text);
  T v{};
  is >> v;
  if (!is || !(is >> std::ws).eof())
    throw std::invalid_argument("not a number: '" + text + "'");
  return v;
}

// Accepts scientific notation for integer-valued keys (e.g. 5e4).
template <typename T>
T parse_count(const std::string& text) {
  const double d = parse_number<double>(text);
  const T v = static_cast<T>(d);
  if (static_cast<double>(v) != d)
    throw std::invalid_argument("not an integer: '" + text + "'");
  return v;
}

Field key_of(std::string section, std::string key, int& v) {
  return {std::move(section), std::move(key),
          [&v](const std::string& s) { v = parse_count<int>(s); },
          [&v] { return std::to_string(v); }};
}

Field key_of(std::string section, std::string key, std::uint64_t& v) {
  return {std::move(section), std::move(key),
          [&v](const std::string& s) { v = parse_number<std::uint64_t>(s); },
          [&v] { return std::to_string(v); }};
}

Field key_of(std::string section, std::string key, long long& v) {
  return {std::move(section), std::move(key),
          [&v](const std::string& s) { v = parse_count<long long>(s); },
          [&v] { return std::to_string(v); }};
}

Field key_of(std::string section, std::string key, double& v) {
  return {std::move(section), std::move(key),
          [&v](const std::string& s) { v = parse_number<double>(s); },
          [&v] { return format_double(v); }};
}

Field key_of(std::string section, std::string key, std::string& v) {
  return {std::move(section), std::move(key),
          [&v](const std::string& s) { v = s; }, [&v] { return v; }};
}

template <typename E>
Field enum_key_of(std::string section, std::string key, E& v,
                E (*parse)(const std::string&), std::string (*name)(E)) {
  return {std::move(section), std::move(key),
          [&v, parse](const std::string& s) { v = parse(s); },
          [&v, name] { return name(v); }};
}

std::vector<Field> fields(ExperimentSpec& s) {
  std::vector<Field> f;
  f.push_back(key_of("game", "preset", s.preset));
  auto& g = s.game;
  f.push_back(key_of("bargaining", "n_items", g.n_items));
  f.push_back(key_of("bargaining", "valuation_min", g.valuation_min));
  f.push_back(key_of("bargaining", "valuation_max", g.valuation_max));
  f.push_back(key_of("bargaining", "pool_min", g.pool_min));
  f.push_back(key_of("bargaining", "pool_max", g.pool_max));
  f.push_back(key_of("bargaining", "max_turns", g.max_turns));
  f.push_back(key_of("bargaining", "discount", g.discount));

  auto& d = s.dataset;
  f.push_back(key_of("dataset", "behavior", d.behavior));
  f.push_back(key_of("dataset", "size", d.size));
  f.push_back(key_of("dataset", "seed", d.seed));
  f.push_back(key_of("dataset", "sigma_eq_trials", d.sigma_eq_trials));
  f.push_back(key_of("dataset", "sigma_eq_iterations", d.sigma_eq_iterations));
  f.push_back(key_of("dataset", "checkpoints", d.checkpoints));

  auto& m = s.model;
  f.push_back(key_of("model", "ensemble_size", m.ensemble_size));
  f.push_back(key_of("model", "hidden_width", m.hidden_width));
  f.push_back(key_of("model", "depth", m.depth));
  f.push_back(key_of("model", "batch_size", m.batch_size));
  f.push_back(key_of("model", "learning_rate", m.learning_rate));
  f.push_back(key_of("model", "training_steps", m.training_steps));
  f.push_back(key_of("model", "terminal_match_tol", m.terminal_match_tol));
  f.push_back(key_of("model", "max_rollout_len", m.max_rollout_len));
  f.push_back(enum_key_of("model", "optimizer", m.optimizer, nn::parse_optimizer,
                        nn::optimizer_name));

  auto& q = s.ddqn;
  f.push_back(key_of("ddqn", "hidden_width", q.hidden_width));
  f.push_back(key_of("ddqn", "depth", q.depth));
  f.push_back(key_of("ddqn", "replay_capacity", q.replay_capacity));
  f.push_back(key_of("ddqn", "batch_size", q.batch_size));
  f.push_back(key_of("ddqn", "learning_rate", q.learning_rate));
  f.push_back(key_of("ddqn", "target_update_every", q.target_update_every));
  f.push_back(key_of("ddqn", "learn_every", q.learn_every));
  f.push_back(key_of("ddqn", "discount", q.discount));
  f.push_back(key_of("ddqn", "min_buffer", q.min_buffer));
  f.push_back(key_of("ddqn", "eps_start", q.eps_start));
  f.push_back(key_of("ddqn", "eps_end", q.eps_end));
  f.push_back(key_of("ddqn", "eps_decay_steps", q.eps_decay_steps));
  f.push_back(key_of("ddqn", "training_steps", q.training_steps));
  f.push_back(enum_key_of("ddqn", "optimizer", q.optimizer, nn::parse_optimizer,
                        nn::optimizer_name));

  auto& b = s.bc;
  f.push_back(key_of("bc", "hidden_width", b.hidden_width));
  f.push_back(key_of("bc", "depth", b.depth));
  f.push_back(key_of("bc", "learning_rate", b.learning_rate));
  f.push_back(key_of("bc", "batch_size", b.batch_size));
  f.push_back(key_of("bc", "training_steps", b.training_steps));
  f.push_back(enum_key_of("bc", "optimizer", b.optimizer, nn::parse_optimizer,
                        nn::optimizer_name));

  f.push_back(key_of("objective", "penalty_weight", s.penalty_weight));
  f.push_back(key_of("objective", "alpha_init", s.alpha_init));
  f.push_back(key_of("objective", "anneal_steps", s.anneal_steps));
  f.push_back(enum_key_of("objective", "mode", s.objective_mode,
                        parse_objective_mode, objective_mode_name));

  auto& ms = s.mss;
  f.push_back(enum_key_of("mss", "kind", ms.kind, parse_solver_kind,
                        solver_kind_name));
  f.push_back(key_of("mss", "step_size", ms.step_size));
  f.push_back(key_of("mss", "max_steps", ms.max_steps));
  f.push_back(key_of("mss", "convergence_tol", ms.convergence_tol));
  f.push_back(key_of("mss", "regret_threshold", ms.regret_threshold));
  f.push_back(key_of("mss", "restarts", ms.restarts));
  f.push_back(key_of("mss", "seed", ms.seed));

  f.push_back(enum_key_of("run", "algorithm", s.algorithm, parse_algorithm,
                        algorithm_name));
  f.push_back(key_of("run", "iterations", s.iterations));
  f.push_back(key_of("run", "simulations_per_entry", s.simulations_per_entry));
  f.push_back(key_of("run", "alpha_bc", s.alpha_bc));
  f.push_back(key_of("run", "seed", s.seed));

  auto& e = s.eval;
  f.push_back(key_of("eval", "eval_window", e.eval_window));
  f.push_back(key_of("eval", "true_simulations", e.true_simulations));
  f.push_back(enum_key_of("eval", "oracle", e.oracle, parse_oracle_kind,
                        oracle_kind_name));
  f.push_back(key_of("eval", "contexts", e.exact.contexts));
  f.push_back(key_of("eval", "opponent_samples", e.exact.opponent_samples));
  f.push_back(key_of("eval", "node_budget", e.exact.node_budget));
  f.push_back(key_of("eval", "seed", e.exact.seed));
  f.push_back({"eval", "solvers",
               [&s](const std::string& text) {
                 s.eval_solvers.clear();
                 std::istringstream is(text);
                 std::string item;
                 while (std::getline(is, item, ',')) {
                   const auto a = item.find_first_not_of(" \t");
                   const auto z = item.find_last_not_of(" \t");
                   if (a == std::string::npos) continue;
                   s.eval_solvers.push_back(
                       parse_solver_kind(item.substr(a, z - a + 1)));
                 }
               },
               [&s] {
                 std::string out;
                 for (std::size_t i = 0; i < s.eval_solvers.size(); ++i)
                   out += (i ? "," : "") + solver_kind_name(s.eval_solvers[i]);
                 return out;
               }});
  return f;
}

}  // namespace

RunConfig ExperimentSpec::run_config() const {
  RunConfig r;
  r.algorithm = algorithm;
  r.iterations = iterations;
  r.simulations_per_entry = simulations_per_entry;
  r.mss = mss;
  r.penalty_weight = penalty_weight;
  r.alpha_init = alpha_init;
  r.anneal_steps = anneal_steps;
  r.objective_mode = objective_mode;
  r.alpha_bc = alpha_bc;
  r.seed = seed;
  r.ddqn = ddqn;
  r.model = model;
  r.bc = bc;
  return r;
}

void ExperimentSpec::validate() const {
  try {
    if (preset != "default" && preset != "mini")
      throw std::invalid_argument("game.preset must be default or mini");
    game.validate();
    if (dataset.behavior != "uniform" && dataset.behavior != "sigma_eq")
      throw std::invalid_argument("dataset.behavior must be uniform or sigma_eq");
    if (dataset.size < 1) throw std::invalid_argument("dataset.size < 1");
    if (dataset.sigma_eq_trials < 1 || dataset.sigma_eq_iterations < 1)
      throw std::invalid_argument("dataset sigma_eq counts must be positive");
    run_config().validate();
    eval.validate();
    if (iterations > 0 && eval.eval_window > iterations)
      throw std::invalid_argument("eval.eval_window exceeds run.iterations");
    if (eval_solvers.empty())
      throw std::invalid_argument("eval.solvers is empty");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

ExperimentSpec parse_spec(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  ExperimentSpec spec;
  if (auto preset = tree.get_optional<std::string>("game.preset")) {
    if (*preset == "mini") spec.game = BargainingConfig::mini();
  }
  auto all = fields(spec);
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError("key outside any section: " + section);
    for (const auto& [key, value] : body) {
      auto it = std::find_if(all.begin(), all.end(), [&](const Field& f) {
        return f.section == section && f.key == key;
      });
      if (it == all.end())
        throw ConfigError("unknown config key [" + section + "] " + key);
      try {
        it->set(value.data());
      } catch (const std::exception& e) {
        throw ConfigError("[" + section + "] " + key + ": " + e.what());
      }
    }
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_spec(in);
}

std::string spec_to_ini(const ExperimentSpec& spec) {
  ExperimentSpec copy = spec;
  std::ostringstream os;
  std::string section;
  for (const auto& f : fields(copy)) {
    if (f.section != section) {
      if (!section.empty()) os << "\n";
      section = f.section;
      os << "[" << section << "]\n";
    }
    os << f.key << " = " << f.get() << "\n";
  }
  return os.str();
}

void save_spec(const std::filesystem::path& path, const ExperimentSpec& spec) {
  std::ofstream out(path);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << spec_to_ini(spec);
}

void apply_desk_scale(ExperimentSpec& spec) {
  auto shrink = [](int& v, int factor) {
    if (v > 0) v = std::max(1, (v + factor - 1) / factor);
  };
  shrink(spec.ddqn.training_steps, 100);
  shrink(spec.ddqn.min_buffer, 100);
  shrink(spec.ddqn.eps_decay_steps, 100);
  shrink(spec.ddqn.target_update_every, 10);
  shrink(spec.simulations_per_entry, 20);
  shrink(spec.eval.true_simulations, 20);
  shrink(spec.model.training_steps, 5);
  shrink(spec.bc.training_steps, 5);
  shrink(spec.iterations, 8);
  shrink(spec.eval.eval_window, 8);
  shrink(spec.dataset.sigma_eq_iterations, 8);
  spec.eval.eval_window = std::min(spec.eval.eval_window, std::max(1, spec.iterations));
}

}  // namespace opsro
