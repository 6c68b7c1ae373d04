#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "icvar/env_model.hpp"
#include "icvar/icvar_g.hpp"

namespace icvar {

// Parameters of the hard-to-learn chain+bandit instance: a chain of n regular
// states feeding a {-1,+1}^{d-1} sign bandit over two absorbing outcome
// states, plus one absorbing escape state.
struct HardInstanceParams {
  int dim = 2;           // d >= 2
  int horizon = 2;       // H >= 2
  int chain_length = 1;  // n in [1, H-1]
  double alpha = 0.5;
  double delta_gap = 0.1;  // bandit gap Delta > 0, 2(d-1)Delta < alpha/2
  std::vector<double> mu;  // entries in {-Delta, +Delta}, size d-1

  void validate() const;
};

int hard_num_actions(int dim);                         // 2^{d-1}
std::vector<int> action_signs(int action, int dim);    // {-1,+1}^{d-1}
int signs_to_action(std::span<const int> signs);
int optimal_hard_action(const HardInstanceParams& p);  // componentwise sign of mu

// States: chain s_1..s_n (indices 0..n-1), then absorbing x1, x2, x3.
// Rewards r(x1)=1, r(x2)=0.8, r(x3)=0.2, chain states 0. theta_h = (1, mu).
LinearMixtureMDP hard_instance(const HardInstanceParams& p);

// Closed-form suboptimality of any policy playing `action` at the bandit
// state: 1.2 (H-n) Delta / alpha * #{i : sgn(mu_i) != sign_i}.
double hard_instance_gap(const HardInstanceParams& p, int action);

// Delta schedule c / sqrt(alpha^{n-2} K), clamped to 0.9 alpha / (4(d-1)) so
// the parameter invariant always holds.
double theory_delta(int dim, int chain_length, double alpha, int num_episodes, double c = 1.0);

std::vector<double> random_mu(int dim, double delta_gap, Rng& rng);

// d anchor kernels mixed by a random convex weight vector per step; passes
// validate_mixture by construction. Requires d <= S.
LinearMixtureMDP random_linear_mixture(int dim, int num_states, int num_actions, int horizon,
                                       std::uint64_t seed);

TabularMDP random_tabular(int num_states, int num_actions, int horizon, std::uint64_t seed);

// Kernel class containing the environment's per-step kernels (deduplicated,
// true_index mapping each step to its table) plus seeded random distractors.
FiniteKernelClass kernel_class_around(const TabularMDP& env, int num_distractors,
                                      std::uint64_t seed);

}  // namespace icvar
