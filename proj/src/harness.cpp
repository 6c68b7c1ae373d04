#include "icvar/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "icvar/instance_gen.hpp"

namespace icvar {

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  try {
    ExperimentConfig cfg;
    cfg.algorithm = j.value("algorithm", cfg.algorithm);
    if (j.contains("instance")) cfg.instance = j.at("instance");
    if (j.contains("kernel_class")) cfg.kernel_class = j.at("kernel_class");
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.num_episodes = j.value("K", j.value("num_episodes", cfg.num_episodes));
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.delta = j.value("delta", cfg.delta);
    cfg.epsilon = j.value("epsilon", cfg.epsilon);
    cfg.lambda = j.value("lambda", cfg.lambda);
    cfg.beta = j.value("beta", cfg.beta);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.grid_eps = j.value("grid_eps", cfg.grid_eps);
    cfg.freeze_theta_at_truth = j.value("freeze_theta_at_truth", cfg.freeze_theta_at_truth);
    if (j.contains("output")) {
      cfg.csv_path = j.at("output").value("csv", "");
      cfg.json_path = j.at("output").value("json", "");
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed experiment config: ") + e.what());
  }
}

json ExperimentConfig::echo() const {
  return json{{"algorithm", algorithm},
              {"instance", instance},
              {"kernel_class", kernel_class},
              {"alpha", alpha},
              {"K", num_episodes},
              {"seeds", seeds},
              {"delta", delta},
              {"epsilon", epsilon},
              {"lambda", lambda},
              {"beta", beta},
              {"gamma", gamma},
              {"grid_eps", grid_eps},
              {"freeze_theta_at_truth", freeze_theta_at_truth}};
}

void ExperimentConfig::validate() const {
  if (algorithm != "icvar_l" && algorithm != "icvar_g" && algorithm != "oracle_dp")
    throw ValidationError("unknown algorithm: " + algorithm);
  check_alpha(alpha);
  if (num_episodes < 0) throw ValidationError("K must be nonnegative");
  if (seeds.empty()) throw ValidationError("seed list must be nonempty");
  if (!(delta > 0.0) || delta > 1.0) throw ValidationError("delta must lie in (0, 1]");
}

LoadedInstance load_instance(const ExperimentConfig& cfg) {
  if (cfg.instance.is_null()) throw ValidationError("config has no instance description");
  const std::string source = cfg.instance.value("source", "file");
  LoadedInstance out;
  if (source == "file") {
    const std::string path = cfg.instance.value("path", "");
    if (path.empty()) throw ValidationError("instance source 'file' needs a path");
    const json j = load_json_file(path);
    if (is_tabular_json(j)) {
      out.tabular = tabular_from_json(j);
      out.is_mixture = false;
    } else {
      out.mixture = mixture_from_json(j);
      out.is_mixture = true;
    }
  } else if (source == "hard") {
    HardInstanceParams p;
    p.dim = cfg.instance.value("d", 2);
    p.horizon = cfg.instance.value("H", 3);
    p.chain_length = cfg.instance.value("n", 1);
    p.alpha = cfg.instance.value("alpha", cfg.alpha);
    const double c = cfg.instance.value("c", 1.0);
    const int k_for_delta = cfg.instance.value("K", cfg.num_episodes);
    p.delta_gap = cfg.instance.value("delta_gap",
                                     theory_delta(p.dim, p.chain_length, p.alpha, k_for_delta, c));
    Rng rng(cfg.instance.value("seed", std::uint64_t{0}));
    p.mu = random_mu(p.dim, p.delta_gap, rng);
    out.mixture = hard_instance(p);
    out.is_mixture = true;
  } else if (source == "random") {
    out.mixture = random_linear_mixture(
        cfg.instance.value("d", 2), cfg.instance.value("S", 4), cfg.instance.value("A", 2),
        cfg.instance.value("H", 3), cfg.instance.value("seed", std::uint64_t{0}));
    out.is_mixture = true;
  } else {
    throw ValidationError("unknown instance source: " + source);
  }
  if (out.is_mixture) {
    const auto report = validate_mixture(out.mixture);
    if (!report.pass)
      throw ValidationError("instance failed mixture validation: " + report.summary());
    out.tabular = materialize_tabular(out.mixture);
  } else {
    out.tabular.validate();
  }
  return out;
}

FiniteKernelClass load_kernel_class(const ExperimentConfig& cfg, const TabularMDP& env) {
  if (cfg.kernel_class.is_null())
    throw ValidationError("icvar_g needs a kernel_class description");
  const std::string source = cfg.kernel_class.value("source", "derived");
  if (source == "file") {
    const std::string path = cfg.kernel_class.value("path", "");
    if (path.empty()) throw ValidationError("kernel_class source 'file' needs a path");
    return kernel_class_from_json(load_json_file(path));
  }
  if (source == "derived") {
    return kernel_class_around(env, cfg.kernel_class.value("distractors", 4),
                               cfg.kernel_class.value("seed", std::uint64_t{0}));
  }
  throw ValidationError("unknown kernel_class source: " + source);
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const LoadedInstance inst = load_instance(cfg);
  std::vector<RunResult> results;
  results.reserve(cfg.seeds.size());

  if (cfg.algorithm == "oracle_dp") {
    const DpResult star = icvar_optimal_dp(inst.tabular, cfg.alpha);
    RunResult r;
    r.algorithm = "oracle_dp";
    r.seed = cfg.seeds.front();
    r.horizon = inst.tabular.horizon;
    r.num_episodes = cfg.num_episodes;
    r.alpha = cfg.alpha;
    r.optimal_value = star.values.at(0, inst.tabular.initial_state);
    r.gap.assign(cfg.num_episodes, 0.0);
    r.cum_regret.assign(cfg.num_episodes, 0.0);
    r.optimism.assign(cfg.num_episodes, 1);
    results.push_back(std::move(r));
    return results;
  }

  if (cfg.algorithm == "icvar_l") {
    if (!inst.is_mixture)
      throw ValidationError("icvar_l requires a linear mixture instance (embed it first)");
    for (const auto seed : cfg.seeds) {
      IcvarLConfig run_cfg;
      run_cfg.alpha = cfg.alpha;
      run_cfg.num_episodes = cfg.num_episodes;
      run_cfg.seed = seed;
      run_cfg.delta = cfg.delta;
      run_cfg.epsilon = cfg.epsilon;
      run_cfg.lambda = cfg.lambda;
      run_cfg.beta = cfg.beta;
      run_cfg.freeze_theta_at_truth = cfg.freeze_theta_at_truth;
      results.push_back(run_icvar_l(inst.mixture, run_cfg));
    }
    return results;
  }

  const FiniteKernelClass cls = load_kernel_class(cfg, inst.tabular);
  for (const auto seed : cfg.seeds) {
    IcvarGConfig run_cfg;
    run_cfg.alpha = cfg.alpha;
    run_cfg.num_episodes = cfg.num_episodes;
    run_cfg.seed = seed;
    run_cfg.delta = cfg.delta;
    run_cfg.gamma = cfg.gamma;
    run_cfg.grid_eps = cfg.grid_eps;
    results.push_back(run_icvar_g(inst.tabular, cls, run_cfg));
  }
  return results;
}

namespace {

double quantile_sorted(std::vector<double>& values, double q) {
  std::sort(values.begin(), values.end());
  const std::size_t idx =
      static_cast<std::size_t>(std::floor(q * static_cast<double>(values.size() - 1)));
  return values[idx];
}

}  // namespace

Summary aggregate(const std::vector<RunResult>& results) {
  if (results.empty()) throw ValidationError("aggregate: no results");
  Summary s;
  s.num_runs = static_cast<int>(results.size());
  s.num_episodes = results.front().num_episodes;
  s.algorithm = results.front().algorithm;
  for (const auto& r : results) {
    if (r.num_episodes != s.num_episodes)
      throw ValidationError("aggregate: results have mixed episode counts");
    if (r.algorithm != s.algorithm)
      throw ValidationError("aggregate: results have mixed algorithms");
  }
  const int K = s.num_episodes;
  s.mean_cum_regret.assign(K, 0.0);
  s.median_cum_regret.assign(K, 0.0);
  s.q10_cum_regret.assign(K, 0.0);
  s.q90_cum_regret.assign(K, 0.0);
  std::vector<double> column(results.size());
  for (int k = 0; k < K; ++k) {
    double mean = 0.0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      column[i] = results[i].cum_regret[k];
      mean += column[i];
    }
    s.mean_cum_regret[k] = mean / static_cast<double>(results.size());
    std::vector<double> sorted = column;
    s.median_cum_regret[k] = quantile_sorted(sorted, 0.5);
    sorted = column;
    s.q10_cum_regret[k] = quantile_sorted(sorted, 0.1);
    sorted = column;
    s.q90_cum_regret[k] = quantile_sorted(sorted, 0.9);
  }
  s.mean_final_regret = K > 0 ? s.mean_cum_regret.back() : 0.0;

  int optimistic_runs = 0;
  int member_runs = 0;
  for (const auto& r : results) {
    const bool all_opt =
        std::all_of(r.optimism.begin(), r.optimism.end(), [](std::uint8_t f) { return f; });
    if (all_opt) ++optimistic_runs;
    if (r.algorithm == "icvar_g") {
      const bool all_member = std::all_of(r.membership.begin(), r.membership.end(),
                                          [](std::uint8_t f) { return f; });
      if (all_member) ++member_runs;
    }
  }
  s.optimism_all_fraction = static_cast<double>(optimistic_runs) / s.num_runs;
  s.membership_all_fraction =
      s.algorithm == "icvar_g" ? static_cast<double>(member_runs) / s.num_runs : 0.0;
  return s;
}

json summary_to_json(const Summary& s) {
  return json{{"num_runs", s.num_runs},
              {"num_episodes", s.num_episodes},
              {"algorithm", s.algorithm},
              {"mean_cum_regret", s.mean_cum_regret},
              {"median_cum_regret", s.median_cum_regret},
              {"q10_cum_regret", s.q10_cum_regret},
              {"q90_cum_regret", s.q90_cum_regret},
              {"mean_final_regret", s.mean_final_regret},
              {"optimism_all_fraction", s.optimism_all_fraction},
              {"membership_all_fraction", s.membership_all_fraction}};
}

std::string render_csv(const std::vector<RunResult>& results) {
  std::ostringstream out;
  const std::string algorithm = results.empty() ? "" : results.front().algorithm;
  const int H = results.empty() ? 0 : results.front().horizon;
  out << "seed,episode,gap,cum_regret,optimism_flag";
  if (algorithm == "icvar_l") {
    out << ",bonus_sum";
    for (int h = 1; h <= H; ++h) out << ",theta_err_h" << h;
  } else if (algorithm == "icvar_g") {
    out << ",membership_flag,g_sq_sum";
    for (int h = 1; h <= H; ++h) out << ",conf_set_size_h" << h;
  }
  out << "\n";
  for (const auto& r : results) {
    for (int k = 0; k < r.num_episodes; ++k) {
      out << r.seed << "," << (k + 1) << "," << format_double(r.gap[k]) << ","
          << format_double(r.cum_regret[k]) << "," << static_cast<int>(r.optimism[k]);
      if (r.algorithm == "icvar_l") {
        out << "," << format_double(r.bonus_sum[k]);
        for (int h = 0; h < H; ++h) out << "," << format_double(r.theta_err[k][h]);
      } else if (r.algorithm == "icvar_g") {
        out << "," << static_cast<int>(r.membership[k]) << ","
            << format_double(r.g_sq_sum[k]);
        for (int h = 0; h < H; ++h) out << "," << r.conf_set_size[k][h];
      }
      out << "\n";
    }
  }
  return out.str();
}

void emit_csv(const std::vector<RunResult>& results, const std::string& path) {
  write_text_file(path, render_csv(results));
}

void emit_json(const std::vector<RunResult>& results, const ExperimentConfig& cfg,
               const std::string& path) {
  json runs = json::array();
  for (const auto& r : results) runs.push_back(run_result_to_json(r));
  write_json_file(path, json{{"config", cfg.echo()}, {"runs", std::move(runs)}});
}

}  // namespace icvar
