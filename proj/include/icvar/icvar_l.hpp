#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "icvar/env_model.hpp"
#include "icvar/risk_ops.hpp"
#include "icvar/run_result.hpp"
#include "icvar/tables.hpp"

namespace icvar {

// Bonus multiplier: H * sqrt(d * log((H + K H^3) / delta)) + sqrt(lambda).
double beta_from_theory(int dim, int horizon, int num_episodes, double delta, double lambda);

// Net accuracy d*H*sqrt(alpha^{H-3}/K), clamped to [1e-4*H, H/2].
double theory_epsilon(int dim, int horizon, double alpha, int num_episodes);

// Per-step ridge-regression state: covariance, maintained inverse, moment sum
// and estimator, plus the hyperparameters the per-step operations need.
class LinearLearnerState {
 public:
  LinearLearnerState(int dim, double lambda, double alpha, double beta, EpsNet net,
                     int refresh_period = 500);

  // Rank-1 update: Lambda += psi psi^T, moment += target * psi, theta = inv * moment.
  // The maintained inverse is re-factorized every refresh_period updates.
  void ridge_update(const Eigen::VectorXd& psi, double target);
  void refresh_inverse();

  // Diagnostic mode: pins theta_hat; ridge updates are rejected afterwards.
  void freeze_theta(const Eigen::VectorXd& theta);
  bool frozen() const { return frozen_; }

  const Eigen::MatrixXd& covariance() const { return cov_; }
  const Eigen::MatrixXd& covariance_inverse() const { return inv_; }
  const Eigen::VectorXd& theta_hat() const { return theta_; }
  const Eigen::VectorXd& moment() const { return moment_; }
  int update_count() const { return updates_; }
  int dim() const { return static_cast<int>(theta_.size()); }

  double inv_norm(const Eigen::VectorXd& v) const;  // ||v||_{Lambda^{-1}}
  double cov_norm(const Eigen::VectorXd& v) const;  // ||v||_{Lambda}

  double alpha = 1.0;
  double beta = 0.0;
  double lambda = 1.0;
  EpsNet net;

 private:
  Eigen::MatrixXd cov_, inv_;
  Eigen::VectorXd moment_, theta_;
  int updates_ = 0;
  int refresh_period_ = 500;
  bool frozen_ = false;
};

struct NetSelection {
  double x = 0.0;       // net point maximizing the Lambda^{-1} feature norm
  double norm = 0.0;    // the maximal norm
  Eigen::VectorXd psi;  // feature at the maximizer
};

// argmax over the net of ||psi_{(x - v_next)^+}(s,a)||_{Lambda^{-1}}; ties go
// to the smallest x.
NetSelection select_net_feature(const LinearLearnerState& state, std::span<const double> v_next,
                                const LinearMixtureMDP& mdp, int s, int a);

double select_x(const LinearLearnerState& state, std::span<const double> v_next,
                const LinearMixtureMDP& mdp, int s, int a);

// B(s,a) = (beta / alpha) * max_x ||psi_{(x - v_next)^+}(s,a)||_{Lambda^{-1}}.
double compute_bonus(const LinearLearnerState& state, std::span<const double> v_next,
                     const LinearMixtureMDP& mdp, int s, int a);

struct OptimisticSlice {
  std::vector<double> q;    // [s][a]
  std::vector<double> v;    // min{max_a q, H}
  std::vector<int> actions; // greedy, lowest-index ties
};

// Q(s,a) = r_h(s,a) + cvar_eps_net(theta_hat, v_next) + 2 eps + bonus.
OptimisticSlice optimistic_backup(const LinearLearnerState& state,
                                  std::span<const double> v_next, const LinearMixtureMDP& mdp,
                                  int h);

struct IcvarLConfig {
  double alpha = 0.5;
  int num_episodes = 0;
  std::uint64_t seed = 0;
  double delta = 0.1;
  double epsilon = 0.0;  // <= 0: theory default
  double lambda = 0.0;   // <= 0: H^2
  double beta = -1.0;    // < 0: theory default
  int refresh_period = 500;
  bool freeze_theta_at_truth = false;  // diagnostic: skip learning, pin theta
};

RunResult run_icvar_l(const LinearMixtureMDP& env, const IcvarLConfig& cfg);

}  // namespace icvar
