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


#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "CLI11.hpp"
#include "json.hpp"
#include "opsro/bargaining.hpp"
#include "opsro/dataset_io.hpp"
#include "opsro/empirical_game.hpp"
#include "opsro/evaluation.hpp"
#include "opsro/meta_solvers.hpp"
#include "opsro/psro_driver.hpp"
#include "opsro/run_io.hpp"

namespace opsro::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::shared_ptr<const BargainingGame> make_game(const ExperimentSpec& spec) {
  return std::make_shared<const BargainingGame>(spec.game);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + path.string());
  out << text;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("missing " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ArtifactError("malformed " + path.string() + ": " + e.what());
  }
}

std::string csv(double v) {
  return std::isfinite(v) ? format_csv_double(v) : std::string("nan");
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double json_number(const json& j) {
  return j.is_number() ? j.get<double>() : std::nan("");
}

std::string trial_dir_name(int trial) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "trial_%02d", trial);
  return buf;
}

// Final profiles of the cached PSRO trials, building missing ones.
std::vector<BehaviorProfile> sigma_eq_profiles(
    const ExperimentSpec& spec, std::shared_ptr<const BargainingGame> game) {
  if (spec.dataset.checkpoints.empty())
    throw ConfigError("sigma_eq datasets need [dataset] checkpoints");
  const fs::path root(spec.dataset.checkpoints);
  std::vector<BehaviorProfile> profiles;
  for (int t = 0; t < spec.dataset.sigma_eq_trials; ++t) {
    const fs::path dir = root / trial_dir_name(t);
    if (!fs::exists(dir / "run.json")) {
      ExperimentSpec trial = spec;
      trial.algorithm = Algorithm::kPsro;
      trial.iterations = spec.dataset.sigma_eq_iterations;
      trial.penalty_weight = 0.0;
      trial.alpha_init = 0.0;
      trial.alpha_bc = 0.0;
      trial.eval.eval_window = std::min(trial.eval.eval_window, trial.iterations);
      trial.seed = derive_seed(spec.dataset.seed, static_cast<std::uint64_t>(t));
      std::clog << "[sigma_eq] PSRO trial " << t + 1 << "/"
                << spec.dataset.sigma_eq_trials << "\n";
      Rng rng(trial.seed);
      const RunArtifacts art = run_psro(game, trial.run_config(), rng);
      write_run(dir, art, trial,
                {{"game_config_hash", game->config_hash()},
                 {"role", "sigma_eq_checkpoint"}});
    }
    RunRecord rec = read_run(dir, game);
    if (rec.profiles.empty()) throw ArtifactError("checkpoint has no profiles");
    profiles.push_back({rec.strategies, rec.profiles.back()});
  }
  return profiles;
}

}  // namespace

ExperimentSpec resolve_spec(const CommonOptions& opts) {
  ExperimentSpec spec = opts.config.empty() ? ExperimentSpec{} : load_spec(opts.config);
  if (opts.desk_scale) apply_desk_scale(spec);
  return spec;
}

void cmd_generate_dataset(const CommonOptions& opts, const fs::path& out) {
  ExperimentSpec spec = resolve_spec(opts);
  if (opts.seed) spec.dataset.seed = *opts.seed;
  spec.validate();
  const auto game = make_game(spec);
  Dataset data;
  if (spec.dataset.behavior == "uniform") {
    const PolicyPtr u = std::make_shared<UniformRandomPolicy>();
    const std::vector<PolicyPtr> joint(game->num_players(), u);
    data = generate_dataset(*game, joint, spec.dataset.size, spec.dataset.seed,
                            "uniform");
  } else {
    const auto profiles = sigma_eq_profiles(spec, game);
    data = generate_profile_mixture_dataset(*game, profiles, spec.dataset.size,
                                            spec.dataset.seed, "sigma_eq");
  }
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_dataset(out, data);
  std::clog << "[dataset] " << data.trajectories.size() << " trajectories ("
            << data.metadata.behavior_policy_tag << ") -> " << out.string()
            << "\n";
}

void cmd_solve(const CommonOptions& opts, const fs::path& dataset_path,
               const fs::path& out) {
  ExperimentSpec spec = resolve_spec(opts);
  if (opts.seed) spec.seed = *opts.seed;
  spec.validate();
  if (fs::exists(out / "run.json"))
    throw ArtifactError(out.string() + " already contains a run");
  const auto game = make_game(spec);
  std::optional<Dataset> data;
  json meta = {{"game_config_hash", game->config_hash()}, {"seed", spec.seed}};
  if (spec.algorithm != Algorithm::kPsro) {
    if (dataset_path.empty())
      throw ConfigError(algorithm_name(spec.algorithm) + " needs --dataset");
    data = load_dataset(dataset_path);
    if (data->metadata.game_config_hash != game->config_hash())
      throw ArtifactError("dataset was generated for a different game");
    meta["dataset"] = {{"path", fs::absolute(dataset_path).string()},
                       {"behavior", data->metadata.behavior_policy_tag},
                       {"size", data->trajectories.size()},
                       {"seed", data->metadata.seed}};
  }
  Rng rng(spec.seed);
  const RunArtifacts art =
      run_algorithm(data ? &*data : nullptr, game, spec.run_config(), rng);
  write_run(out, art, spec, meta);
  std::clog << "[solve] " << art.strategies.size() << " strategies -> "
            << out.string() << "\n";
}

void cmd_evaluate(const fs::path& run_dir, const CommonOptions& opts,
                  const fs::path& out) {
  if (!fs::is_directory(run_dir) || !fs::exists(run_dir / "run.json"))
    throw ArtifactError(run_dir.string() + " is not a completed run directory");
  ExperimentSpec spec;
  try {
    spec = load_spec(run_dir / "config.ini");
  } catch (const ConfigError& e) {
    throw ArtifactError(std::string("bad config snapshot: ") + e.what());
  }
  const auto game = make_game(spec);
  const RunRecord rec = read_run(run_dir, game);

  ExperimentSpec eval_spec = spec;
  if (!opts.config.empty()) {
    const ExperimentSpec other = load_spec(opts.config);
    eval_spec.eval = other.eval;
    eval_spec.eval_solvers = other.eval_solvers;
  }
  if (opts.desk_scale) {
    ExperimentSpec scaled = eval_spec;
    apply_desk_scale(scaled);
    eval_spec.eval = scaled.eval;
  }
  if (opts.seed) eval_spec.eval.exact.seed = *opts.seed;
  EvalConfig ec = eval_spec.eval;
  try {
    ec.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const fs::path dir = out.empty() ? run_dir / "eval" : out;
  fs::create_directories(dir);

  const int count = static_cast<int>(rec.profiles.size());
  const int start = std::max(0, count - ec.eval_window);
  json summary;
  summary["algorithm"] = rec.meta.value("algorithm", std::string());
  summary["mss_train"] = solver_kind_name(spec.mss.kind);
  summary["game_config_hash"] = game->config_hash();
  summary["seed"] = spec.seed;
  summary["penalty_weight"] = spec.penalty_weight;
  summary["alpha_init"] = spec.alpha_init;
  summary["alpha_bc"] = spec.alpha_bc;
  summary["iterations"] = spec.iterations;
  summary["dataset"] = rec.meta.contains("dataset")
                           ? rec.meta["dataset"]
                           : json{{"behavior", "none"}, {"size", 0}};
  summary["num_strategies"] = rec.strategies.size();
  summary["eval_window"] = ec.eval_window;
  summary["oracle"] = oracle_kind_name(ec.oracle);

  std::ostringstream table;
  table << "mss_eval,final_regret,window_mean_regret,oracle_failures\n";
  json per_solver = json::object();
  for (std::size_t k = 0; k < eval_spec.eval_solvers.size(); ++k) {
    const SolverKind kind = eval_spec.eval_solvers[k];
    SolverConfig sc = spec.mss;
    sc.kind = kind;
    std::vector<MixedStrategy> profiles;
    for (int s = start; s < count; ++s)
      profiles.push_back(solve(to_bounded_nfg(rec.game.prefix(s + 1)), sc).profile);

    Rng rng(derive_seed(ec.exact.seed, 0x4e56 + k));
    RegretReport report =
        true_game_regret(rec.strategies, profiles, game, ec, rng);

    std::ostringstream rows;
    rows << "iteration,summed_regret,raw_summed_regret,regret_p0,regret_p1,"
            "profile_value,best_in_set,oracle_value,oracle_used,oracle_failed\n";
    int failures = 0;
    double total = 0.0;
    for (auto& row : report.rows) {
      row.iteration += start;
      failures += row.oracle_failed ? 1 : 0;
      total += row.summed_regret;
      rows << row.iteration << "," << csv(row.summed_regret) << ","
           << csv(row.raw_summed_regret) << "," << csv(row.per_player[0]) << ","
           << csv(row.per_player[1]) << "," << csv(row.profile_value) << ","
           << csv(row.best_in_set) << ","
           << (row.oracle_used ? csv(row.oracle_value) : std::string("nan"))
           << "," << (row.oracle_used ? 1 : 0) << ","
           << (row.oracle_failed ? 1 : 0) << "\n";
      if (row.oracle_failed)
        std::clog << "[evaluate] oracle failed at iteration " << row.iteration
                  << ": " << row.failure << "\n";
    }
    const std::string name = solver_kind_name(kind);
    write_text(dir / ("regret_" + name + ".csv"), rows.str());

    std::ostringstream prof;
    prof << "iteration";
    for (std::size_t j = 0; j < rec.strategies.size(); ++j) prof << ",w" << j;
    prof << "\n";
    for (std::size_t s = 0; s < profiles.size(); ++s) {
      prof << start + static_cast<int>(s);
      for (std::size_t j = 0; j < rec.strategies.size(); ++j)
        prof << "," << csv(j < profiles[s].weights.size() ? profiles[s].weights[j] : 0.0);
      prof << "\n";
    }
    write_text(dir / ("profiles_" + name + ".csv"), prof.str());

    const double final_regret = report.rows.back().summed_regret;
    const double window_mean = total / static_cast<double>(report.rows.size());
    per_solver[name] = {{"final_regret", final_regret},
                        {"window_mean_regret", window_mean},
                        {"oracle_failures", failures}};
    table << name << "," << csv(final_regret) << "," << csv(window_mean) << ","
          << failures << "\n";
  }
  summary["regret"] = per_solver;

  double fidelity = std::nan("");
  if (rec.ensemble) {
    Rng rng(derive_seed(ec.exact.seed, 0xf1de));
    const NormalFormGame truth =
        reconstruct_true(rec.strategies, *game, ec.true_simulations, rng);
    fidelity = model_fidelity(truth, to_bounded_nfg(rec.game).mean);
  }
  const double rho = rec.rho_log.empty() ? std::nan("") : mean_rho(rec.rho_log);
  summary["fidelity"] = nullable(fidelity);
  summary["mean_rho"] = nullable(rho);
  write_text(dir / "regret_summary.csv", table.str());
  write_text(dir / "diagnostics.csv", "fidelity,mean_rho\n" + csv(fidelity) +
                                          "," + csv(rho) + "\n");
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  std::clog << "[evaluate] " << run_dir.string() << " -> " << dir.string() << "\n";
}

namespace {

struct EvaluatedRun {
  fs::path dir;
  json summary;
};

EvaluatedRun load_evaluated(const fs::path& path) {
  for (const fs::path& candidate : {path / "eval" / "summary.json",
                                    path / "summary.json"})
    if (fs::exists(candidate)) return {path, read_json_file(candidate)};
  throw ArtifactError(path.string() + " has no evaluation summary");
}

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

// Sample standard deviation; zero for a single run.
Moments moments(const std::vector<double>& x) {
  Moments m;
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - m.mean) * (v - m.mean);
    m.stddev = std::sqrt(ss / static_cast<double>(x.size() - 1));
  }
  return m;
}

}  // namespace

void cmd_report(const std::vector<fs::path>& run_dirs, const fs::path& out) {
  if (run_dirs.empty()) throw ArtifactError("report needs at least one run");
  std::vector<EvaluatedRun> runs;
  for (const auto& d : run_dirs) runs.push_back(load_evaluated(d));
  const std::string hash = runs[0].summary.value("game_config_hash", std::string());
  for (const auto& r : runs)
    if (r.summary.value("game_config_hash", std::string()) != hash)
      throw ArtifactError("runs come from different game configurations; refusing to aggregate");

  // (algorithm, mss_train, mss_eval, dataset behavior, dataset size)
  using Key = std::tuple<std::string, std::string, std::string, std::string, long long>;
  std::map<Key, std::vector<double>> groups;
  std::ostringstream scatter;
  scatter << "run,algorithm,mss_train,mss_eval,dataset_behavior,dataset_size,"
             "mean_rho,fidelity,final_regret,penalty_weight,alpha_init,alpha_bc\n";
  for (const auto& r : runs) {
    const json& s = r.summary;
    const json& ds = s.at("dataset");
    for (const auto& [name, v] : s.at("regret").items()) {
      const double regret = v.at("final_regret").get<double>();
      const Key key{s.value("algorithm", std::string()),
                    s.value("mss_train", std::string()), name,
                    ds.value("behavior", std::string()),
                    ds.value("size", 0LL)};
      groups[key].push_back(regret);
      scatter << r.dir.string() << "," << std::get<0>(key) << ","
              << std::get<1>(key) << "," << name << "," << std::get<3>(key)
              << "," << std::get<4>(key) << ","
              << csv(json_number(s.at("mean_rho"))) << ","
              << csv(json_number(s.at("fidelity"))) << "," << csv(regret) << ","
              << csv(s.value("penalty_weight", 0.0)) << ","
              << csv(s.value("alpha_init", 0.0)) << ","
              << csv(s.value("alpha_bc", 0.0)) << "\n";
    }
  }

  std::ostringstream summary;
  summary << "algorithm,mss_train,mss_eval,dataset_behavior,dataset_size,n,"
             "mean_regret,std_regret,flag\n";
  for (const auto& [key, values] : groups) {
    const Moments m = moments(values);
    summary << std::get<0>(key) << "," << std::get<1>(key) << ","
            << std::get<2>(key) << "," << std::get<3>(key) << ","
            << std::get<4>(key) << "," << values.size() << "," << csv(m.mean)
            << "," << csv(m.stddev) << "," << (values.size() == 1 ? "n=1" : "")
            << "\n";
    std::cout << std::get<0>(key) << " [" << std::get<1>(key) << " -> "
              << std::get<2>(key) << "] (" << std::get<3>(key) << ", "
              << std::get<4>(key) << "): " << m.mean << " +/- " << m.stddev
              << " (n=" << values.size() << ")\n";
  }

  std::ostringstream welch;
  welch << "mss_eval,group_a,group_b,n_a,n_b,mean_a,mean_b,p_value\n";
  auto label = [](const Key& k) {
    return std::get<0>(k) + "/" + std::get<1>(k) + "/" + std::get<3>(k) + "/" +
           std::to_string(std::get<4>(k));
  };
  for (auto a = groups.begin(); a != groups.end(); ++a) {
    for (auto b = std::next(a); b != groups.end(); ++b) {
      if (std::get<2>(a->first) != std::get<2>(b->first)) continue;
      if (a->second.size() < 2 || b->second.size() < 2) continue;
      welch << std::get<2>(a->first) << "," << label(a->first) << ","
            << label(b->first) << "," << a->second.size() << ","
            << b->second.size() << "," << csv(moments(a->second).mean) << ","
            << csv(moments(b->second).mean) << ","
            << csv(welch_t_test(a->second, b->second)) << "\n";
    }
  }

  fs::create_directories(out);
  write_text(out / "summary.csv", summary.str());
  write_text(out / "scatter.csv", scatter.str());
  write_text(out / "welch.csv", welch.str());
}

int run(int argc, char** argv) {
  CLI::App app{"Offline empirical game solving with learned world models"};
  app.require_subcommand(1);

  CommonOptions gen_opts, solve_opts, eval_opts;
  std::uint64_t seed = 0;
  fs::path gen_out, solve_out, dataset, run_dir, eval_out, report_out;
  std::vector<fs::path> report_runs;

  auto add_common = [&](CLI::App* sub, CommonOptions& o) {
    sub->add_option("--config", o.config, "Experiment config file");
    sub->add_option("--seed", seed, "Override the seed");
    sub->add_flag("--desk-scale", o.desk_scale, "Shrink budgets for quick runs");
  };

  auto* gen = app.add_subcommand("generate-dataset", "Write a trajectory dataset");
  add_common(gen, gen_opts);
  gen->add_option("--out", gen_out, "Dataset file")->required();

  auto* sol = app.add_subcommand("solve", "Run an algorithm and store the run");
  add_common(sol, solve_opts);
  sol->add_option("--dataset", dataset, "Dataset file (offline algorithms)");
  sol->add_option("--out", solve_out, "Run directory")->required();

  auto* ev = app.add_subcommand("evaluate", "Measure true-game regret of a run");
  add_common(ev, eval_opts);
  ev->add_option("--run", run_dir, "Run directory")->required();
  ev->add_option("--out", eval_out, "Output directory (default <run>/eval)");

  auto* rep = app.add_subcommand("report", "Aggregate evaluated runs");
  rep->add_option("runs", report_runs, "Evaluated run directories")->required();
  rep->add_option("--out", report_out, "Report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    auto seeded = [&](CLI::App* sub, CommonOptions o) {
      if (sub->count("--seed") > 0) o.seed = seed;
      return o;
    };
    if (*gen) cmd_generate_dataset(seeded(gen, gen_opts), gen_out);
    if (*sol) cmd_solve(seeded(sol, solve_opts), dataset, solve_out);
    if (*ev) cmd_evaluate(run_dir, seeded(ev, eval_opts), eval_out);
    if (*rep) cmd_report(report_runs, report_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ArtifactError& e) {
    std::cerr << "artifact error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace opsro::cli
