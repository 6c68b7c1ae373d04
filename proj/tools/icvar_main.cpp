#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "icvar/harness.hpp"
#include "icvar/instance_gen.hpp"
#include "icvar/serialization.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitBudget = 3;
constexpr int kExitIo = 4;

using icvar::json;

int cmd_validate(const std::string& path) {
  const json j = icvar::load_json_file(path);
  if (icvar::is_tabular_json(j)) {
    icvar::tabular_from_json(j);  // throws on invalid rows
    std::cout << "PASS: tabular model is valid\n";
    return kExitOk;
  }
  const auto mdp = icvar::mixture_from_json(j);
  const auto report = icvar::validate_mixture(mdp);
  std::cout << report.summary() << "\n";
  return report.pass ? kExitOk : kExitValidation;
}

int cmd_dp(const std::string& path, double alpha, const std::string& policy_path,
           const std::string& out_path) {
  const json j = icvar::load_json_file(path);
  icvar::TabularMDP env;
  if (icvar::is_tabular_json(j)) {
    env = icvar::tabular_from_json(j);
  } else {
    env = icvar::materialize_tabular(icvar::mixture_from_json(j));
  }
  json out;
  if (policy_path.empty()) {
    const auto dp = icvar::icvar_optimal_dp(env, alpha);
    std::cout << "V*_1(s_1) = " << icvar::format_double(dp.values.at(0, env.initial_state))
              << "\n";
    out = icvar::dp_result_to_json(dp, alpha, env.num_actions);
  } else {
    const auto policy = icvar::policy_table_from_json(icvar::load_json_file(policy_path),
                                                      env.horizon, env.num_states);
    const auto values = icvar::icvar_policy_eval(env, policy, alpha);
    std::cout << "V^pi_1(s_1) = " << icvar::format_double(values.at(0, env.initial_state))
              << "\n";
    out = json{{"alpha", alpha},
               {"V", icvar::value_table_to_json(values)},
               {"policy", icvar::policy_table_to_json(policy)}};
  }
  if (!out_path.empty()) icvar::write_json_file(out_path, out);
  return kExitOk;
}

int run_command(icvar::ExperimentConfig cfg) {
  const auto results = icvar::run_experiment(cfg);
  double total_wall = 0.0;
  for (const auto& r : results) total_wall += r.wall_seconds;
  std::cerr << "ran " << results.size() << " run(s), " << cfg.num_episodes
            << " episode(s) each, wall " << total_wall << " s\n";
  if (!results.empty()) {
    const auto summary = icvar::aggregate(results);
    std::cout << "mean final regret = " << icvar::format_double(summary.mean_final_regret)
              << "\n";
  }
  if (!cfg.csv_path.empty()) icvar::emit_csv(results, cfg.csv_path);
  if (!cfg.json_path.empty()) icvar::emit_json(results, cfg, cfg.json_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterated-CVaR episodic RL simulator"};
  app.require_subcommand(1);

  // validate
  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "validate an MDP JSON file");
  validate->add_option("mdp", validate_path, "MDP JSON file")->required();

  // dp
  std::string dp_path, dp_policy, dp_out;
  double dp_alpha = 1.0;
  auto* dp = app.add_subcommand("dp", "exact Iterated-CVaR dynamic programming");
  dp->add_option("mdp", dp_path, "MDP JSON file")->required();
  dp->add_option("--alpha", dp_alpha, "risk level in (0,1]")->required();
  dp->add_option("--policy", dp_policy, "evaluate this policy JSON instead of optimizing");
  dp->add_option("--out", dp_out, "write tables to this JSON file");

  // gen-hard
  int gh_d = 2, gh_H = 3, gh_n = 1, gh_K = 1000;
  double gh_alpha = 0.5, gh_c = 1.0, gh_delta = 0.0;
  std::uint64_t gh_seed = 0;
  std::string gh_out;
  auto* gen_hard = app.add_subcommand("gen-hard", "emit the hard-to-learn instance");
  gen_hard->add_option("--d", gh_d, "feature dimension (>= 2)");
  gen_hard->add_option("--H", gh_H, "horizon");
  gen_hard->add_option("--n", gh_n, "chain length in [1, H-1]");
  gen_hard->add_option("--alpha", gh_alpha, "risk level");
  gen_hard->add_option("--K", gh_K, "episode budget for the Delta schedule");
  gen_hard->add_option("--c", gh_c, "Delta schedule constant");
  gen_hard->add_option("--delta", gh_delta, "explicit Delta (overrides the schedule)");
  gen_hard->add_option("--seed", gh_seed, "seed for the sign pattern mu");
  gen_hard->add_option("--out", gh_out, "output JSON path")->required();

  // gen-random
  int gr_d = 2, gr_S = 4, gr_A = 2, gr_H = 3;
  std::uint64_t gr_seed = 0;
  std::string gr_out;
  auto* gen_random = app.add_subcommand("gen-random", "emit a random linear mixture instance");
  gen_random->add_option("--d", gr_d, "feature dimension (<= S)");
  gen_random->add_option("--S", gr_S, "number of states");
  gen_random->add_option("--A", gr_A, "number of actions");
  gen_random->add_option("--H", gr_H, "horizon");
  gen_random->add_option("--seed", gr_seed, "seed");
  gen_random->add_option("--out", gr_out, "output JSON path")->required();

  // run-l / run-g shared flags
  struct RunFlags {
    std::string config_path, instance_path, class_path, csv_path, json_path;
    double alpha = -1.0, delta = -1.0, epsilon = -1.0, lambda = -1.0, beta = -2.0,
           gamma = -2.0, grid_eps = -1.0;
    int episodes = -1, class_size = -1;
    std::uint64_t class_seed = 0;
    std::vector<std::uint64_t> seeds;
  };
  auto add_run_flags = [](CLI::App* cmd, RunFlags& f, bool general) {
    cmd->add_option("--config", f.config_path, "experiment config JSON");
    cmd->add_option("--instance", f.instance_path, "instance JSON (overrides config)");
    cmd->add_option("--alpha", f.alpha, "risk level");
    cmd->add_option("--K", f.episodes, "episodes per run");
    cmd->add_option("--seed", f.seeds, "run seeds (repeatable)");
    cmd->add_option("--delta", f.delta, "confidence parameter");
    cmd->add_option("--csv", f.csv_path, "CSV output path");
    cmd->add_option("--json", f.json_path, "JSON output path");
    if (general) {
      cmd->add_option("--gamma", f.gamma, "confidence radius override");
      cmd->add_option("--grid-eps", f.grid_eps, "diameter grid step");
      cmd->add_option("--class", f.class_path, "kernel class JSON");
      cmd->add_option("--class-size", f.class_size, "derived class: distractor count");
      cmd->add_option("--class-seed", f.class_seed, "derived class: seed");
    } else {
      cmd->add_option("--epsilon", f.epsilon, "eps-net accuracy override");
      cmd->add_option("--lambda", f.lambda, "ridge regularizer override");
      cmd->add_option("--beta", f.beta, "bonus multiplier override");
    }
  };
  RunFlags lf, gf;
  auto* run_l = app.add_subcommand("run-l", "run the linear-mixture learner");
  add_run_flags(run_l, lf, false);
  auto* run_g = app.add_subcommand("run-g", "run the finite-class learner");
  add_run_flags(run_g, gf, true);

  // eluder
  std::string el_path;
  double el_eps = 0.1;
  auto* eluder = app.add_subcommand("eluder", "eluder dimension of a finite function class");
  eluder->add_option("class", el_path, "function class JSON {values: [[...]]}")->required();
  eluder->add_option("--eps", el_eps, "independence scale")->required();

  // aggregate
  std::vector<std::string> ag_in;
  std::string ag_out;
  auto* agg = app.add_subcommand("aggregate", "summarize run-result JSON files");
  agg->add_option("--in", ag_in, "run-result JSON files")->required();
  agg->add_option("--out", ag_out, "summary JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  auto make_config = [](const RunFlags& f, const std::string& algorithm) {
    icvar::ExperimentConfig cfg;
    if (!f.config_path.empty())
      cfg = icvar::ExperimentConfig::from_json(icvar::load_json_file(f.config_path));
    cfg.algorithm = algorithm;
    if (!f.instance_path.empty()) cfg.instance = json{{"source", "file"}, {"path", f.instance_path}};
    if (f.alpha >= 0.0) cfg.alpha = f.alpha;
    if (f.episodes >= 0) cfg.num_episodes = f.episodes;
    if (!f.seeds.empty()) cfg.seeds = f.seeds;
    if (f.delta >= 0.0) cfg.delta = f.delta;
    if (f.epsilon >= 0.0) cfg.epsilon = f.epsilon;
    if (f.lambda >= 0.0) cfg.lambda = f.lambda;
    if (f.beta >= -1.0 && f.beta != -2.0) cfg.beta = f.beta;
    if (f.gamma >= -1.0 && f.gamma != -2.0) cfg.gamma = f.gamma;
    if (f.grid_eps >= 0.0) cfg.grid_eps = f.grid_eps;
    if (!f.class_path.empty())
      cfg.kernel_class = json{{"source", "file"}, {"path", f.class_path}};
    else if (f.class_size >= 0)
      cfg.kernel_class =
          json{{"source", "derived"}, {"distractors", f.class_size}, {"seed", f.class_seed}};
    if (!f.csv_path.empty()) cfg.csv_path = f.csv_path;
    if (!f.json_path.empty()) cfg.json_path = f.json_path;
    return cfg;
  };

  try {
    if (*validate) return cmd_validate(validate_path);
    if (*dp) return cmd_dp(dp_path, dp_alpha, dp_policy, dp_out);
    if (*gen_hard) {
      icvar::HardInstanceParams p;
      p.dim = gh_d;
      p.horizon = gh_H;
      p.chain_length = gh_n;
      p.alpha = gh_alpha;
      p.delta_gap =
          gh_delta > 0.0 ? gh_delta : icvar::theory_delta(gh_d, gh_n, gh_alpha, gh_K, gh_c);
      icvar::Rng rng(gh_seed);
      p.mu = icvar::random_mu(gh_d, p.delta_gap, rng);
      const auto mdp = icvar::hard_instance(p);
      icvar::write_json_file(gh_out, icvar::mixture_to_json(mdp));
      std::cout << "wrote hard instance: d=" << gh_d << " H=" << gh_H << " n=" << gh_n
                << " alpha=" << gh_alpha << " Delta=" << icvar::format_double(p.delta_gap)
                << "\n";
      return kExitOk;
    }
    if (*gen_random) {
      const auto mdp = icvar::random_linear_mixture(gr_d, gr_S, gr_A, gr_H, gr_seed);
      icvar::write_json_file(gr_out, icvar::mixture_to_json(mdp));
      std::cout << "wrote random mixture: d=" << gr_d << " S=" << gr_S << " A=" << gr_A
                << " H=" << gr_H << "\n";
      return kExitOk;
    }
    if (*run_l) return run_command(make_config(lf, "icvar_l"));
    if (*run_g) return run_command(make_config(gf, "icvar_g"));
    if (*eluder) {
      const auto fns = icvar::function_class_from_json(icvar::load_json_file(el_path));
      std::cout << icvar::eluder_dimension(fns, el_eps) << "\n";
      return kExitOk;
    }
    if (*agg) {
      std::vector<icvar::RunResult> results;
      for (const auto& path : ag_in) {
        const json j = icvar::load_json_file(path);
        for (const auto& rj : j.at("runs")) results.push_back(icvar::run_result_from_json(rj));
      }
      const auto summary = icvar::aggregate(results);
      const json sj = icvar::summary_to_json(summary);
      if (!ag_out.empty())
        icvar::write_json_file(ag_out, sj);
      else
        std::cout << sj.dump(1) << "\n";
      return kExitOk;
    }
  } catch (const icvar::BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const icvar::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const icvar::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
