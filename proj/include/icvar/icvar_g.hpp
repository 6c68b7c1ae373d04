#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "icvar/env_model.hpp"
#include "icvar/run_result.hpp"
#include "icvar/tables.hpp"

namespace icvar {

// Finite candidate set of transition kernels P' : (s,a) -> distribution over
// successor states, shared across steps, plus the per-step index of the true
// kernel.
struct FiniteKernelClass {
  int num_states = 0;
  int num_actions = 0;
  std::vector<std::vector<double>> kernels;  // [i][(s*A + a)*S + s']
  std::vector<int> true_index;               // per step h

  int size() const { return static_cast<int>(kernels.size()); }
  std::span<const double> row(int kernel, int s, int a) const {
    const std::size_t base = (static_cast<std::size_t>(s) * num_actions + a) * num_states;
    return {kernels[kernel].data() + base, static_cast<std::size_t>(num_states)};
  }
  void validate(int horizon) const;
};

// z_P(s, a, f) = sum_{s'} P(s'|s,a) f(s').
double z_value(const FiniteKernelClass& cls, int kernel, int s, int a,
               std::span<const double> f);

// Squared z-gap of two kernels at one (s, a, f) tuple.
double dist_metric(const FiniteKernelClass& cls, int p, int q, int s, int a,
                   std::span<const double> f);

// History of one step h: the tuples X_i = (s, a, f) with realized targets and
// the kernel estimate that was in use when the tuple was recorded.
struct StepHistory {
  struct Item {
    int s = 0;
    int a = 0;
    std::vector<double> f;  // clipped function (x - Vhat_next)^+ over states
    double target = 0.0;    // (x - Vhat_next)^+(s_next)
    int estimate = 0;       // P-hat index in use that round
  };
  std::vector<Item> items;
};

// argmin over kernels of sum_i (target_i - z(X_i))^2; ties -> lowest index.
int fit_least_squares(const FiniteKernelClass& cls, const StepHistory& history);

// All kernels with sum_i (z(X_i) - z_{estimate_i}(X_i))^2 <= gamma_hat^2.
std::vector<int> confidence_set(const FiniteKernelClass& cls, const StepHistory& history,
                                double gamma_hat);

// Estimation radius 4 H^2 (2 log(2 H N / delta) + 1 + sqrt(log(5 K^2 / delta)))
// with the covering number replaced by the cardinality of the finite class.
double gamma_from_theory(int class_size, int horizon, int num_episodes, double delta);

struct DiameterPoint {
  double x = 0.0;
  double g = 0.0;
};

// Grid point maximizing sup-inf of z over the confidence set at
// f = (x - v_next)^+; ties -> lowest grid point. Exhaustive over the set.
DiameterPoint x_maximizing_diameter(const FiniteKernelClass& cls, std::span<const int> conf_set,
                                    std::span<const double> v_next, int s, int a,
                                    std::span<const double> grid);

// max over kernels in the set of the exact CVaR of v_next under the kernel row.
double optimistic_cvar_sup(const FiniteKernelClass& cls, std::span<const int> conf_set,
                           std::span<const double> v_next, int s, int a, double alpha);

// Sorted evaluation grid for the diameter argmax: the eps-net, the interval
// ends {0, H}, and the kinks of x -> (x - v)^+ at the values of v_next.
std::vector<double> diameter_grid(const EpsNet& net, std::span<const double> v_next,
                                  double horizon);

struct IcvarGConfig {
  double alpha = 0.5;
  int num_episodes = 0;
  std::uint64_t seed = 0;
  double delta = 0.1;
  double gamma = -1.0;    // < 0: theory default
  double grid_eps = 0.0;  // <= 0: H/64
};

// Optional audit trail for tests: full per-step histories plus the estimate
// index, confidence set and optimistic values in use during each episode.
struct GTrace {
  std::vector<StepHistory> history;                        // per h
  std::vector<std::vector<int>> estimate_by_episode;       // [k][h]
  std::vector<std::vector<std::vector<int>>> conf_by_episode;  // [k][h]
  std::vector<std::vector<std::vector<double>>> vhat_by_episode;  // [k][h][s]
};

RunResult run_icvar_g(const TabularMDP& env, const FiniteKernelClass& cls,
                      const IcvarGConfig& cfg, GTrace* trace = nullptr);

struct EluderBudget {
  int max_domain = 6;
  int max_class = 6;
  int max_depth = 8;
  long max_nodes = 20000000;
};

// Eluder dimension of a finite function class on a finite domain, by
// exhaustive sequence search (repetition allowed). functions[z][x] are the
// function values. Throws BudgetError when the search budget cannot certify
// the answer.
int eluder_dimension(const std::vector<std::vector<double>>& functions, double eps,
                     const EluderBudget& budget = {});

}  // namespace icvar
