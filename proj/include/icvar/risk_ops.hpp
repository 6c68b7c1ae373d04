#pragma once

#include <algorithm>
#include <limits>
#include <span>
#include <vector>

#include "icvar/common.hpp"
#include "icvar/env_model.hpp"
#include "icvar/tables.hpp"

namespace icvar {

struct DiscreteDistribution {
  std::vector<double> values;
  std::vector<double> probs;
  void validate() const;
};

// VaR^alpha = min{x : F(x) >= alpha} on a discrete distribution. Equal-value
// atoms are merged before the quantile scan.
double var_of(std::span<const double> probs, std::span<const double> values, double alpha);
double var_discrete(const DiscreteDistribution& dist, double alpha);

// CVaR^alpha = VaR - E[(VaR - X)^+]/alpha (tail average with fractional weight
// on the straddling atom).
double cvar_of(std::span<const double> probs, std::span<const double> values, double alpha);
double cvar_discrete(const DiscreteDistribution& dist, double alpha);

// Distorted distribution Q supported on the ascending-value tail of mass
// alpha; satisfies sum_s Q(s) V(s) = CVaR^alpha(V) and sum Q = 1.
std::vector<double> distorted_distribution(std::span<const double> probs,
                                           std::span<const double> values, double alpha);

// Approximated CVaR operator: max over x in the net of
// x - <theta, psi_{(x-V)^+}(s,a)> / alpha.
double cvar_eps_net(std::span<const double> theta, const LinearMixtureMDP& mdp,
                    std::span<const double> v_next, int s, int a, double alpha,
                    const EpsNet& net);

struct DpResult {
  ValueTable values;
  std::vector<double> q;  // [h][s][a]
  PolicyTable policy;
};

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw ValidationError("risk level alpha must lie in (0, 1]");
}

// Exact backward recursion: Q_h(s,a) = r_h(s,a) + CVaR^alpha of V_{h+1} under
// the transition row; V_h = max_a Q_h with lowest-index tie-breaking.
template <class Model>
DpResult icvar_optimal_dp(const Model& mdp, double alpha) {
  check_alpha(alpha);
  const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
  DpResult out{ValueTable(H, S), std::vector<double>(static_cast<std::size_t>(H) * S * A, 0.0),
               PolicyTable(H, S)};
  for (int h = H - 1; h >= 0; --h) {
    const auto v_next = out.values.row(h + 1);
    for (int s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      int best_a = 0;
      for (int a = 0; a < A; ++a) {
        const auto row = mdp.transition_row(h, s, a);
        const double q = mdp.reward(h, s, a) + cvar_of(row, v_next, alpha);
        out.q[(static_cast<std::size_t>(h) * S + s) * A + a] = q;
        if (q > best) {
          best = q;
          best_a = a;
        }
      }
      out.values.at(h, s) = best;
      out.policy.at(h, s) = best_a;
    }
  }
  return out;
}

template <class Model>
ValueTable icvar_policy_eval(const Model& mdp, const PolicyTable& policy, double alpha) {
  check_alpha(alpha);
  const int S = mdp.num_states, H = mdp.horizon;
  if (policy.horizon != H || policy.num_states != S)
    throw ValidationError("policy shape does not match the model");
  ValueTable values(H, S);
  for (int h = H - 1; h >= 0; --h) {
    const auto v_next = values.row(h + 1);
    for (int s = 0; s < S; ++s) {
      const int a = policy.at(h, s);
      const auto row = mdp.transition_row(h, s, a);
      values.at(h, s) = mdp.reward(h, s, a) + cvar_of(row, v_next, alpha);
    }
  }
  return values;
}

}  // namespace icvar
