#include "icvar/icvar_l.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace icvar {

double beta_from_theory(int dim, int horizon, int num_episodes, double delta, double lambda) {
  if (dim < 1 || horizon < 1 || num_episodes < 0 || !(delta > 0.0) || delta > 1.0 ||
      !(lambda > 0.0))
    throw ValidationError("beta_from_theory: invalid parameters");
  const double h = horizon;
  const double k = std::max(num_episodes, 1);
  return h * std::sqrt(dim * std::log((h + k * h * h * h) / delta)) + std::sqrt(lambda);
}

double theory_epsilon(int dim, int horizon, double alpha, int num_episodes) {
  check_alpha(alpha);
  if (dim < 1 || horizon < 1) throw ValidationError("theory_epsilon: invalid parameters");
  const double k = std::max(num_episodes, 1);
  const double raw = dim * horizon * std::sqrt(std::pow(alpha, horizon - 3) / k);
  return std::clamp(raw, 1e-4 * horizon, horizon / 2.0);
}

LinearLearnerState::LinearLearnerState(int dim, double lambda_, double alpha_, double beta_,
                                       EpsNet net_, int refresh_period)
    : alpha(alpha_),
      beta(beta_),
      lambda(lambda_),
      net(net_),
      cov_(Eigen::MatrixXd::Identity(dim, dim) * lambda_),
      inv_(Eigen::MatrixXd::Identity(dim, dim) / lambda_),
      moment_(Eigen::VectorXd::Zero(dim)),
      theta_(Eigen::VectorXd::Zero(dim)),
      refresh_period_(refresh_period) {
  if (!(lambda_ > 0.0)) throw ValidationError("ridge regularizer lambda must be positive");
  check_alpha(alpha_);
  if (beta_ < 0.0) throw ValidationError("bonus multiplier must be nonnegative");
}

void LinearLearnerState::ridge_update(const Eigen::VectorXd& psi, double target) {
  if (frozen_) throw std::logic_error("ridge_update on a frozen learner state");
  if (psi.size() != cov_.rows()) throw ValidationError("ridge_update: feature dimension");
  cov_ += psi * psi.transpose();
  const Eigen::VectorXd ip = inv_ * psi;
  inv_ -= (ip * ip.transpose()) / (1.0 + psi.dot(ip));
  inv_ = 0.5 * (inv_ + inv_.transpose());
  moment_ += target * psi;
  ++updates_;
  if (refresh_period_ > 0 && updates_ % refresh_period_ == 0) refresh_inverse();
  theta_ = inv_ * moment_;
}

void LinearLearnerState::refresh_inverse() {
  inv_ = cov_.ldlt().solve(Eigen::MatrixXd::Identity(cov_.rows(), cov_.cols()));
  inv_ = 0.5 * (inv_ + inv_.transpose());
}

void LinearLearnerState::freeze_theta(const Eigen::VectorXd& theta) {
  if (theta.size() != theta_.size()) throw ValidationError("freeze_theta: dimension mismatch");
  theta_ = theta;
  frozen_ = true;
}

double LinearLearnerState::inv_norm(const Eigen::VectorXd& v) const {
  return std::sqrt(std::max(0.0, v.dot(inv_ * v)));
}

double LinearLearnerState::cov_norm(const Eigen::VectorXd& v) const {
  return std::sqrt(std::max(0.0, v.dot(cov_ * v)));
}

namespace {

// psi_{(x - v)^+}(s,a) as an Eigen vector.
Eigen::VectorXd clipped_psi(const LinearMixtureMDP& mdp, std::span<const double> v_next,
                            double x, int s, int a) {
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(mdp.dim);
  for (int sp = 0; sp < mdp.num_states; ++sp) {
    const double w = x - v_next[sp];
    if (w <= 0.0) continue;
    const auto feat = mdp.feature(sp, s, a);
    for (int j = 0; j < mdp.dim; ++j) psi[j] += w * feat[j];
  }
  return psi;
}

}  // namespace

NetSelection select_net_feature(const LinearLearnerState& state, std::span<const double> v_next,
                                const LinearMixtureMDP& mdp, int s, int a) {
  NetSelection best;
  best.norm = -1.0;
  for (int i = 0; i < state.net.count; ++i) {
    const double x = state.net.point(i);
    Eigen::VectorXd psi = clipped_psi(mdp, v_next, x, s, a);
    const double norm = state.inv_norm(psi);
    if (norm > best.norm) {
      best.x = x;
      best.norm = norm;
      best.psi = std::move(psi);
    }
  }
  return best;
}

double select_x(const LinearLearnerState& state, std::span<const double> v_next,
                const LinearMixtureMDP& mdp, int s, int a) {
  return select_net_feature(state, v_next, mdp, s, a).x;
}

double compute_bonus(const LinearLearnerState& state, std::span<const double> v_next,
                     const LinearMixtureMDP& mdp, int s, int a) {
  return state.beta / state.alpha * select_net_feature(state, v_next, mdp, s, a).norm;
}

OptimisticSlice optimistic_backup(const LinearLearnerState& state,
                                  std::span<const double> v_next, const LinearMixtureMDP& mdp,
                                  int h) {
  const int S = mdp.num_states, A = mdp.num_actions;
  const double horizon = static_cast<double>(mdp.horizon);
  const double two_eps = 2.0 * state.net.step;
  OptimisticSlice slice;
  slice.q.resize(static_cast<std::size_t>(S) * A);
  slice.v.resize(S);
  slice.actions.resize(S);
  std::span<const double> theta{state.theta_hat().data(),
                                static_cast<std::size_t>(state.dim())};
  for (int s = 0; s < S; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    int best_a = 0;
    for (int a = 0; a < A; ++a) {
      const double cvar = cvar_eps_net(theta, mdp, v_next, s, a, state.alpha, state.net);
      const double bonus = compute_bonus(state, v_next, mdp, s, a);
      const double q = mdp.reward(h, s, a) + cvar + two_eps + bonus;
      slice.q[static_cast<std::size_t>(s) * A + a] = q;
      if (q > best) {
        best = q;
        best_a = a;
      }
    }
    slice.v[s] = std::min(best, horizon);
    slice.actions[s] = best_a;
  }
  return slice;
}

RunResult run_icvar_l(const LinearMixtureMDP& env, const IcvarLConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  check_alpha(cfg.alpha);
  if (cfg.num_episodes < 0) throw ValidationError("episode count must be nonnegative");
  env.check_shapes();
  const int S = env.num_states, H = env.horizon, d = env.dim;
  const int K = cfg.num_episodes;

  const double lambda = cfg.lambda > 0.0 ? cfg.lambda : static_cast<double>(H) * H;
  const double epsilon =
      cfg.epsilon > 0.0 ? cfg.epsilon : theory_epsilon(d, H, cfg.alpha, K);
  const double beta =
      cfg.beta >= 0.0 ? cfg.beta : beta_from_theory(d, H, K, cfg.delta, lambda);
  const EpsNet net = EpsNet::over_horizon(H, epsilon);

  // Exact oracles on the true model.
  const TabularMDP truth = materialize_tabular(env);
  const DpResult star = icvar_optimal_dp(truth, cfg.alpha);
  const double v_star = star.values.at(0, env.initial_state);

  std::vector<LinearLearnerState> learners;
  learners.reserve(H);
  for (int h = 0; h < H; ++h)
    learners.emplace_back(d, lambda, cfg.alpha, beta, net, cfg.refresh_period);
  std::vector<Eigen::VectorXd> true_thetas(H);
  for (int h = 0; h < H; ++h)
    true_thetas[h] =
        Eigen::Map<const Eigen::VectorXd>(env.thetas[h].data(), d);
  if (cfg.freeze_theta_at_truth)
    for (int h = 0; h < H; ++h) learners[h].freeze_theta(true_thetas[h]);

  RunResult out;
  out.algorithm = "icvar_l";
  out.seed = cfg.seed;
  out.horizon = H;
  out.num_episodes = K;
  out.alpha = cfg.alpha;
  out.optimal_value = v_star;
  out.beta_used = beta;
  out.epsilon_used = epsilon;
  out.lambda_used = lambda;
  out.gap.reserve(K);
  out.cum_regret.reserve(K);
  out.optimism.reserve(K);
  out.bonus_sum.reserve(K);
  out.theta_err.reserve(K);

  Rng rng(cfg.seed);
  std::vector<std::vector<double>> v_hat(H + 1, std::vector<double>(S, 0.0));
  PolicyTable policy(H, S);
  double cum = 0.0;

  for (int k = 0; k < K; ++k) {
    // Optimistic value iteration over all states.
    for (int h = H - 1; h >= 0; --h) {
      OptimisticSlice slice = optimistic_backup(learners[h], v_hat[h + 1], env, h);
      v_hat[h] = std::move(slice.v);
      for (int s = 0; s < S; ++s) policy.at(h, s) = slice.actions[s];
    }

    std::vector<double> errs(H);
    for (int h = 0; h < H; ++h)
      errs[h] = learners[h].cov_norm(true_thetas[h] - learners[h].theta_hat());
    out.theta_err.push_back(std::move(errs));
    out.optimism.push_back(v_hat[0][env.initial_state] >= v_star - 1e-9 ? 1 : 0);

    // Greedy play plus CVaR-adapted regression updates.
    int s = env.initial_state;
    double bonus_total = 0.0;
    for (int h = 0; h < H; ++h) {
      const int a = policy.at(h, s);
      NetSelection sel = select_net_feature(learners[h], v_hat[h + 1], env, s, a);
      bonus_total += beta / cfg.alpha * sel.norm;
      const int next = rng.categorical(truth.transition_row_view(h, s, a));
      if (!cfg.freeze_theta_at_truth) {
        const double target = std::max(sel.x - v_hat[h + 1][next], 0.0);
        learners[h].ridge_update(sel.psi, target);
      }
      s = next;
    }
    out.bonus_sum.push_back(bonus_total);

    const ValueTable v_pi = icvar_policy_eval(truth, policy, cfg.alpha);
    const double gap = v_star - v_pi.at(0, env.initial_state);
    cum += gap;
    out.gap.push_back(gap);
    out.cum_regret.push_back(cum);
  }

  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace icvar
