#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "icvar/icvar_l.hpp"
#include "icvar/instance_gen.hpp"

using namespace icvar;

TEST_CASE("bonus multiplier formula") {
  // d=1, H=1, K=1, delta=1, lambda=1: sqrt(log 2) + 1.
  CHECK(beta_from_theory(1, 1, 1, 1.0, 1.0) ==
        doctest::Approx(1.8325546111576977).epsilon(1e-12));
  // Direct evaluation at d=4, H=3, K=1000, delta=0.1, lambda=9.
  const double want = 3.0 * std::sqrt(4.0 * std::log((3.0 + 1000.0 * 27.0) / 0.1)) + 3.0;
  CHECK(beta_from_theory(4, 3, 1000, 0.1, 9.0) == doctest::Approx(want).epsilon(1e-12));
  // Monotone in K.
  CHECK(beta_from_theory(4, 3, 2000, 0.1, 9.0) > beta_from_theory(4, 3, 1000, 0.1, 9.0));
  CHECK_THROWS_AS(beta_from_theory(4, 3, 1000, 0.0, 9.0), ValidationError);
}

TEST_CASE("theory epsilon is clamped") {
  const double e = theory_epsilon(4, 3, 0.5, 4000);
  CHECK(e == doctest::Approx(12.0 / std::sqrt(4000.0)).epsilon(1e-12));
  CHECK(theory_epsilon(4, 3, 0.5, 1) == doctest::Approx(1.5).epsilon(1e-12));  // H/2 cap
  CHECK(theory_epsilon(1, 2, 1.0, 100000000) == doctest::Approx(2e-4).epsilon(1e-9));
}

TEST_CASE("ridge regression state") {
  const EpsNet net = EpsNet::over_horizon(2, 0.5);

  SUBCASE("no updates leaves theta at zero") {
    LinearLearnerState st(3, 1.0, 0.5, 1.0, net);
    CHECK(st.theta_hat().norm() == 0.0);
    CHECK(st.update_count() == 0);
  }

  SUBCASE("single basis-vector update") {
    LinearLearnerState st(3, 1.0, 0.5, 1.0, net);
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(3);
    psi[0] = 1.0;
    st.ridge_update(psi, 1.0);
    CHECK(st.theta_hat()[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(st.theta_hat()[1] == 0.0);
    CHECK(st.theta_hat()[2] == 0.0);
  }

  SUBCASE("maintained inverse and estimator track a dense re-solve") {
    Rng rng(401);
    const int d = 6;
    const double lambda = 2.0;
    LinearLearnerState st(d, lambda, 0.5, 1.0, net);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(d, d) * lambda;
    Eigen::VectorXd moment = Eigen::VectorXd::Zero(d);
    double prev_det = cov.determinant();
    for (int i = 0; i < 50; ++i) {
      Eigen::VectorXd psi(d);
      for (int j = 0; j < d; ++j) psi[j] = rng.uniform(-1.0, 1.0);
      const double y = rng.uniform(0.0, 2.0);
      st.ridge_update(psi, y);
      cov += psi * psi.transpose();
      moment += y * psi;
      const double det = st.covariance().determinant();
      CHECK(det >= prev_det - 1e-9);
      prev_det = det;
    }
    const Eigen::MatrixXd fresh = cov.inverse();
    CHECK((st.covariance_inverse() - fresh).cwiseAbs().maxCoeff() <= 1e-10);
    const Eigen::VectorXd direct = cov.ldlt().solve(moment);
    CHECK((st.theta_hat() - direct).cwiseAbs().maxCoeff() <= 1e-8);
    const Eigen::MatrixXd ident = st.covariance() * st.covariance_inverse();
    CHECK((ident - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-8);
    // Covariance stays symmetric with spectrum bounded below by lambda.
    CHECK((st.covariance() - st.covariance().transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(st.covariance());
    CHECK(eig.eigenvalues().minCoeff() >= lambda - 1e-9);
  }

  SUBCASE("frozen state rejects updates") {
    LinearLearnerState st(2, 1.0, 0.5, 1.0, net);
    st.freeze_theta(Eigen::Vector2d(0.5, 0.5));
    CHECK(st.theta_hat()[0] == 0.5);
    CHECK_THROWS_AS(st.ridge_update(Eigen::Vector2d(1, 0), 0.5), std::logic_error);
  }
}

TEST_CASE("select_x and the bonus term") {
  const auto mdp = random_linear_mixture(3, 4, 2, 2, 402);
  const int H = mdp.horizon;
  const EpsNet net = EpsNet::over_horizon(H, 0.25);
  LinearLearnerState st(mdp.dim, 4.0, 0.5, 2.0, net);

  SUBCASE("zero continuation values push x to the top of the net") {
    std::vector<double> v(4, 0.0);
    CHECK(select_x(st, v, mdp, 1, 0) == doctest::Approx(net.max_point()).epsilon(1e-12));
  }

  SUBCASE("saturated continuation values zero the features; smallest net point wins") {
    std::vector<double> v(4, static_cast<double>(H));
    CHECK(select_x(st, v, mdp, 1, 0) == doctest::Approx(net.point(0)).epsilon(1e-12));
    CHECK(compute_bonus(st, v, mdp, 1, 0) == 0.0);
  }

  SUBCASE("agrees with exhaustive enumeration") {
    Rng rng(403);
    // Push some asymmetry into the covariance first.
    for (int i = 0; i < 10; ++i) {
      Eigen::VectorXd psi(mdp.dim);
      for (int j = 0; j < mdp.dim; ++j) psi[j] = rng.uniform(-1.0, 1.0);
      st.ridge_update(psi, rng.uniform(0.0, 1.0));
    }
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> v(4);
      for (auto& x : v) x = rng.uniform(0.0, H);
      const int s = rng.below(4), a = rng.below(2);
      const Eigen::MatrixXd inv = st.covariance().inverse();
      double best_norm = -1.0, best_x = 0.0;
      for (int i = 0; i < net.count; ++i) {
        const double x = net.point(i);
        std::vector<double> f(4);
        for (int sp = 0; sp < 4; ++sp) f[sp] = std::max(x - v[sp], 0.0);
        const auto psi_v = psi_feature(mdp, f, s, a);
        const Eigen::Map<const Eigen::VectorXd> psi(psi_v.data(), mdp.dim);
        const double norm = std::sqrt(std::max(0.0, psi.dot(inv * psi)));
        if (norm > best_norm + 1e-15) {
          best_norm = norm;
          best_x = x;
        }
      }
      CHECK(select_x(st, v, mdp, s, a) == doctest::Approx(best_x).epsilon(1e-12));
      CHECK(compute_bonus(st, v, mdp, s, a) ==
            doctest::Approx(st.beta / st.alpha * best_norm).epsilon(1e-8));
    }
  }

  SUBCASE("zero multiplier kills the bonus") {
    LinearLearnerState flat(mdp.dim, 4.0, 0.5, 0.0, net);
    std::vector<double> v(4, 0.2);
    CHECK(compute_bonus(flat, v, mdp, 0, 0) == 0.0);
  }

  SUBCASE("identity covariance closed form") {
    LinearLearnerState fresh(mdp.dim, 4.0, 0.5, 2.0, net);
    std::vector<double> v(4, 0.0);
    const auto psi_one = psi_feature(mdp, std::vector<double>(4, 1.0), 2, 1);
    double norm_sq = 0.0;
    for (double x : psi_one) norm_sq += x * x;
    const double want = 2.0 / 0.5 * net.max_point() * std::sqrt(norm_sq) / 2.0;  // /sqrt(lambda)
    CHECK(compute_bonus(fresh, v, mdp, 2, 1) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("optimistic backup") {
  const auto mdp = random_linear_mixture(3, 4, 2, 2, 404);
  const EpsNet net = EpsNet::over_horizon(2, 0.25);

  SUBCASE("first-episode form: theta zero makes the cvar term the top net point") {
    LinearLearnerState st(mdp.dim, 4.0, 0.5, 1.5, net);
    std::vector<double> v(4, 0.0);
    const auto slice = optimistic_backup(st, v, mdp, 0);
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 2; ++a) {
        const double bonus = compute_bonus(st, v, mdp, s, a);
        const double want = mdp.reward(0, s, a) + net.max_point() + 2.0 * net.step + bonus;
        CHECK(slice.q[s * 2 + a] == doctest::Approx(want).epsilon(1e-10));
      }
    for (int s = 0; s < 4; ++s) CHECK(slice.v[s] <= 2.0);  // clipped at H
  }

  SUBCASE("composes cvar_eps_net, 2eps and the bonus") {
    LinearLearnerState st(mdp.dim, 4.0, 0.5, 1.5, net);
    Rng rng(405);
    for (int i = 0; i < 8; ++i) {
      Eigen::VectorXd psi(mdp.dim);
      for (int j = 0; j < mdp.dim; ++j) psi[j] = rng.uniform(-0.5, 0.5);
      st.ridge_update(psi, rng.uniform(0.0, 1.0));
    }
    std::vector<double> v(4);
    for (auto& x : v) x = rng.uniform(0.0, 2.0);
    const auto slice = optimistic_backup(st, v, mdp, 1);
    std::span<const double> theta{st.theta_hat().data(),
                                  static_cast<std::size_t>(st.dim())};
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 2; ++a) {
        const double want = mdp.reward(1, s, a) +
                            cvar_eps_net(theta, mdp, v, s, a, 0.5, net) + 2.0 * net.step +
                            compute_bonus(st, v, mdp, s, a);
        CHECK(slice.q[s * 2 + a] == doctest::Approx(want).epsilon(1e-12));
      }
  }

  SUBCASE("near-exact backup with the true parameter and no bonus") {
    const EpsNet fine = EpsNet::over_horizon(2, 0.01);
    LinearLearnerState st(mdp.dim, 4.0, 0.5, 0.0, fine);
    st.freeze_theta(Eigen::Map<const Eigen::VectorXd>(mdp.thetas[1].data(), mdp.dim));
    std::vector<double> v(4);
    Rng rng(406);
    for (auto& x : v) x = rng.uniform(0.0, 2.0);
    const auto slice = optimistic_backup(st, v, mdp, 1);
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 2; ++a) {
        const auto row = transition_distribution(mdp, 1, s, a);
        const double exact = mdp.reward(1, s, a) + cvar_of(row, v, 0.5);
        // One operator application: within 2 eps below, plus the 2 eps shift.
        CHECK(slice.q[s * 2 + a] >= exact - 1e-10);
        CHECK(slice.q[s * 2 + a] <= exact + 4.0 * fine.step + 1e-10);
      }
  }
}

TEST_CASE("run_icvar_l basic contracts") {
  const auto mdp = random_linear_mixture(3, 4, 2, 2, 407);

  SUBCASE("zero episodes") {
    IcvarLConfig cfg;
    cfg.alpha = 0.5;
    cfg.num_episodes = 0;
    const auto r = run_icvar_l(mdp, cfg);
    CHECK(r.gap.empty());
    CHECK(r.cum_regret.empty());
  }

  SUBCASE("same seed twice is identical") {
    IcvarLConfig cfg;
    cfg.alpha = 0.5;
    cfg.num_episodes = 40;
    cfg.seed = 9;
    const auto a = run_icvar_l(mdp, cfg);
    const auto b = run_icvar_l(mdp, cfg);
    CHECK(a.gap == b.gap);
    CHECK(a.cum_regret == b.cum_regret);
    CHECK(a.bonus_sum == b.bonus_sum);
    CHECK(a.theta_err == b.theta_err);
    CHECK(a.optimism == b.optimism);
  }

  SUBCASE("gaps are nonnegative and the cumulative column is their running sum") {
    IcvarLConfig cfg;
    cfg.alpha = 0.4;
    cfg.num_episodes = 60;
    cfg.seed = 10;
    const auto r = run_icvar_l(mdp, cfg);
    double cum = 0.0;
    for (int k = 0; k < 60; ++k) {
      CHECK(r.gap[k] >= -1e-9);
      cum += r.gap[k];
      CHECK(r.cum_regret[k] == cum);
    }
  }

  SUBCASE("single-action model has zero gap everywhere") {
    const auto single = random_linear_mixture(2, 3, 1, 2, 408);
    IcvarLConfig cfg;
    cfg.alpha = 1.0;
    cfg.num_episodes = 25;
    const auto r = run_icvar_l(single, cfg);
    for (double g : r.gap) CHECK(g == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("frozen-truth learner with no bonus is near-optimal in value") {
  // With theta pinned to the truth and beta = 0, the only error left is the
  // eps-net discretization, which propagates as at most O(H eps / alpha^H).
  const auto mdp = random_linear_mixture(2, 3, 2, 2, 409);
  IcvarLConfig cfg;
  cfg.alpha = 0.5;
  cfg.num_episodes = 5;
  cfg.beta = 0.0;
  cfg.epsilon = 0.005;
  cfg.freeze_theta_at_truth = true;
  const auto r = run_icvar_l(mdp, cfg);
  const double bound = 10.0 * mdp.horizon * cfg.epsilon / std::pow(cfg.alpha, mdp.horizon);
  for (double g : r.gap) CHECK(g <= bound);
}

TEST_CASE("visited-pair bonus sums decay across run halves") {
  const auto mdp = random_linear_mixture(4, 5, 3, 3, 7);
  IcvarLConfig cfg;
  cfg.alpha = 0.5;
  cfg.num_episodes = 2000;
  cfg.seed = 1;
  const auto r = run_icvar_l(mdp, cfg);
  double first = 0.0, second = 0.0;
  for (int k = 0; k < 1000; ++k) first += r.bonus_sum[k];
  for (int k = 1000; k < 2000; ++k) second += r.bonus_sum[k];
  CHECK(second <= 1.5 * first);
}

TEST_CASE("optimism and concentration hold on most seeds at small scale") {
  const auto mdp = random_linear_mixture(3, 4, 2, 3, 410);
  int optimistic_runs = 0, concentrated_runs = 0;
  const int runs = 10;
  for (int seed = 0; seed < runs; ++seed) {
    IcvarLConfig cfg;
    cfg.alpha = 0.5;
    cfg.num_episodes = 120;
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.delta = 0.1;
    const auto r = run_icvar_l(mdp, cfg);
    bool all_opt = true, all_conc = true;
    for (int k = 0; k < cfg.num_episodes; ++k) {
      if (!r.optimism[k]) all_opt = false;
      for (double e : r.theta_err[k])
        if (e > r.beta_used + 1e-9) all_conc = false;
    }
    optimistic_runs += all_opt;
    concentrated_runs += all_conc;
  }
  CHECK(optimistic_runs >= 8);
  CHECK(concentrated_runs >= 8);
}
