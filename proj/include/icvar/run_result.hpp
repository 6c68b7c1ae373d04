#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace icvar {

// Per-episode diagnostics of a learning run. The gap column is the exact
// suboptimality V*_1(s_1) - V^{pi_k}_1(s_1) computed by the DP oracles.
struct RunResult {
  std::string algorithm;  // icvar_l | icvar_g | oracle_dp
  std::uint64_t seed = 0;
  int horizon = 0;
  int num_episodes = 0;
  double alpha = 1.0;
  double optimal_value = 0.0;  // V*_1(s_1)

  std::vector<double> gap;
  std::vector<double> cum_regret;
  std::vector<std::uint8_t> optimism;  // Vhat_{k,1}(s_1) >= V*_1(s_1) - 1e-9

  // icvar_l
  std::vector<double> bonus_sum;               // per episode, over visited steps
  std::vector<std::vector<double>> theta_err;  // [k][h], ||theta_h - that||_{Lambda_{k,h}}
  double beta_used = 0.0;
  double epsilon_used = 0.0;
  double lambda_used = 0.0;

  // icvar_g
  std::vector<std::uint8_t> membership;         // truth in every confidence set of episode k
  std::vector<double> g_sq_sum;                 // per episode, sum_h g^2 at visited pairs
  std::vector<std::vector<int>> conf_set_size;  // [k][h]
  std::vector<double> deviation_excess;         // worst violation of 0<=opt-exact<=g/alpha
  double gamma_used = 0.0;
  double grid_eps_used = 0.0;

  // Not serialized: emitted bytes must be (config, seed)-deterministic.
  double wall_seconds = 0.0;
};

}  // namespace icvar
