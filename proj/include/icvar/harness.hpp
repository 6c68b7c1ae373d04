#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icvar/icvar_g.hpp"
#include "icvar/icvar_l.hpp"
#include "icvar/run_result.hpp"
#include "icvar/serialization.hpp"

namespace icvar {

// Experiment description: algorithm, instance source, risk level, episode
// budget, seed fan-out and hyperparameter overrides. JSON-backed; CLI flags
// override file values.
struct ExperimentConfig {
  std::string algorithm = "icvar_l";  // icvar_l | icvar_g | oracle_dp
  json instance;        // {"source": "file"|"hard"|"random", ...}
  json kernel_class;    // {"source": "file"|"derived", ...} (icvar_g)
  double alpha = 0.5;
  int num_episodes = 0;
  std::vector<std::uint64_t> seeds = {0};
  double delta = 0.1;
  double epsilon = 0.0;   // <= 0: theory
  double lambda = 0.0;    // <= 0: H^2
  double beta = -1.0;     // < 0: theory
  double gamma = -1.0;    // < 0: theory
  double grid_eps = 0.0;  // <= 0: H/64
  bool freeze_theta_at_truth = false;
  std::string csv_path;
  std::string json_path;

  static ExperimentConfig from_json(const json& j);
  json echo() const;
  void validate() const;
};

struct LoadedInstance {
  bool is_mixture = false;
  LinearMixtureMDP mixture;
  TabularMDP tabular;  // always populated (materialized for mixtures)
};

// Builds and validates the instance named by the config.
LoadedInstance load_instance(const ExperimentConfig& cfg);

FiniteKernelClass load_kernel_class(const ExperimentConfig& cfg, const TabularMDP& env);

// One run per seed, in seed order. V* is computed once by the exact DP oracle.
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg);

struct Summary {
  int num_runs = 0;
  int num_episodes = 0;
  std::string algorithm;
  std::vector<double> mean_cum_regret;
  std::vector<double> median_cum_regret;
  std::vector<double> q10_cum_regret;
  std::vector<double> q90_cum_regret;
  double mean_final_regret = 0.0;
  double optimism_all_fraction = 0.0;    // runs optimistic in every episode
  double membership_all_fraction = 0.0;  // icvar_g runs with truth in every set
};

Summary aggregate(const std::vector<RunResult>& results);
json summary_to_json(const Summary& s);

// CSV: one row per (seed, episode); column set depends on the algorithm.
// Doubles are rendered with 17 significant digits.
std::string render_csv(const std::vector<RunResult>& results);
void emit_csv(const std::vector<RunResult>& results, const std::string& path);
void emit_json(const std::vector<RunResult>& results, const ExperimentConfig& cfg,
               const std::string& path);

}  // namespace icvar
