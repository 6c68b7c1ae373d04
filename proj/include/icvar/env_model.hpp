#pragma once

#include <span>
#include <string>
#include <vector>

#include "icvar/common.hpp"
#include "icvar/tables.hpp"

namespace icvar {

// Finite episodic MDP with explicit per-step transition tables. Test substrate
// and the environment form consumed by ICVaR-G.
struct TabularMDP {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  std::vector<double> transitions;  // [h][s][a][s']
  std::vector<double> rewards;      // [h][s][a]
  int initial_state = 0;

  std::span<const double> transition_row_view(int h, int s, int a) const {
    const std::size_t base =
        ((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) * num_states;
    return {transitions.data() + base, static_cast<std::size_t>(num_states)};
  }
  std::vector<double> transition_row(int h, int s, int a) const {
    auto v = transition_row_view(h, s, a);
    return {v.begin(), v.end()};
  }
  double reward(int h, int s, int a) const {
    return rewards[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
  void validate() const;
};

// Finite-state episodic MDP whose transitions factor as <theta_h, phi(s',s,a)>.
struct LinearMixtureMDP {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int dim = 0;
  std::vector<double> phi;                  // [s'][s][a][j]
  std::vector<std::vector<double>> thetas;  // [h][j]
  std::vector<double> rewards;              // [h][s][a]
  int initial_state = 0;

  std::span<const double> feature(int next_state, int s, int a) const {
    const std::size_t base =
        ((static_cast<std::size_t>(next_state) * num_states + s) * num_actions + a) * dim;
    return {phi.data() + base, static_cast<std::size_t>(dim)};
  }
  double reward(int h, int s, int a) const {
    return rewards[(static_cast<std::size_t>(h) * num_states + s) * num_actions + a];
  }
  // Model concept: probability row over successor states.
  std::vector<double> transition_row(int h, int s, int a) const;
  void check_shapes() const;
};

struct MixtureValidationReport {
  bool pass = false;
  // Hard structural checks.
  double worst_negative_entry = 0.0;  // most negative <theta_h, phi(s',s,a)>
  double worst_row_deviation = 0.0;   // max |row sum - 1|
  int worst_h = -1, worst_s = -1, worst_a = -1;
  // Advisory checks, reported but not failing.
  double worst_theta_norm_excess = 0.0;          // max(0, ||theta_h|| - sqrt(d))
  double worst_psi_indicator_norm_excess = 0.0;  // max(0, ||phi(s',s,a)|| - 1)
  std::string summary() const;
};

// Checks the mixture structure of every (h,s,a) row: nonnegativity within
// 1e-12 and normalization within 1e-9 decide pass/fail; parameter and feature
// norm bounds are reported as advisory excesses.
MixtureValidationReport validate_mixture(const LinearMixtureMDP& mdp);

// Probability row <theta_h, phi(.,s,a)> with tiny negatives clamped and the
// row renormalized; deviations beyond 1e-6 raise ValidationError.
std::vector<double> transition_distribution(const LinearMixtureMDP& mdp, int h, int s, int a);

// psi_f(s,a) = sum_{s'} phi(s',s,a) f(s').
std::vector<double> psi_feature(const LinearMixtureMDP& mdp, std::span<const double> f, int s,
                                int a);

// Canonical embedding: phi(s',s,a) = indicator coordinate, theta_h = flattened
// P_h, d = S*S*A. Reproduces the tabular rows exactly.
LinearMixtureMDP embed_tabular(const TabularMDP& tab);

// Per-step tables materialized through transition_distribution.
TabularMDP materialize_tabular(const LinearMixtureMDP& mdp);

struct EpisodeStep {
  int step = 0;
  int state = 0;
  int action = 0;
  double reward = 0.0;
  int next_state = 0;
};

struct EpisodeLog {
  int episode = 0;
  std::vector<EpisodeStep> steps;
};

template <class Model>
EpisodeLog sample_episode(const Model& mdp, const PolicyTable& policy, Rng& rng,
                          int episode_index = 0) {
  if (policy.horizon != mdp.horizon || policy.num_states != mdp.num_states)
    throw ValidationError("policy shape does not match the model");
  EpisodeLog log;
  log.episode = episode_index;
  log.steps.reserve(mdp.horizon);
  int s = mdp.initial_state;
  for (int h = 0; h < mdp.horizon; ++h) {
    const int a = policy.at(h, s);
    if (a < 0 || a >= mdp.num_actions) throw ValidationError("policy action out of range");
    const auto row = mdp.transition_row(h, s, a);
    const int next = rng.categorical(row);
    log.steps.push_back({h, s, a, mdp.reward(h, s, a), next});
    s = next;
  }
  return log;
}

}  // namespace icvar
