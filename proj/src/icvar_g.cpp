#include "icvar/icvar_g.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "icvar/risk_ops.hpp"

namespace icvar {

void FiniteKernelClass::validate(int horizon) const {
  if (num_states <= 0 || num_actions <= 0)
    throw ValidationError("kernel class dimensions must be positive");
  if (kernels.empty()) throw ValidationError("kernel class must be nonempty");
  const std::size_t want = static_cast<std::size_t>(num_states) * num_actions * num_states;
  for (const auto& k : kernels) {
    if (k.size() != want) throw ValidationError("kernel table size does not match (S, A, S)");
  }
  for (int i = 0; i < size(); ++i)
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a) {
        double sum = 0.0;
        for (double p : row(i, s, a)) {
          if (p < 0.0) throw ValidationError("kernel row has a negative entry");
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
          throw ValidationError("kernel row does not sum to 1");
      }
  if (static_cast<int>(true_index.size()) != horizon)
    throw ValidationError("true_index length does not match the horizon");
  for (int t : true_index)
    if (t < 0 || t >= size()) throw ValidationError("true_index out of range");
}

double z_value(const FiniteKernelClass& cls, int kernel, int s, int a,
               std::span<const double> f) {
  if (kernel < 0 || kernel >= cls.size())
    throw ValidationError("z_value: kernel index out of range");
  if (static_cast<int>(f.size()) != cls.num_states)
    throw ValidationError("z_value: f must assign a value to every state");
  const auto r = cls.row(kernel, s, a);
  double z = 0.0;
  for (int sp = 0; sp < cls.num_states; ++sp) z += r[sp] * f[sp];
  return z;
}

double dist_metric(const FiniteKernelClass& cls, int p, int q, int s, int a,
                   std::span<const double> f) {
  const double gap = z_value(cls, p, s, a, f) - z_value(cls, q, s, a, f);
  return gap * gap;
}

int fit_least_squares(const FiniteKernelClass& cls, const StepHistory& history) {
  int best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int c = 0; c < cls.size(); ++c) {
    double loss = 0.0;
    for (const auto& item : history.items) {
      const double resid = item.target - z_value(cls, c, item.s, item.a, item.f);
      loss += resid * resid;
    }
    if (loss < best_loss) {
      best_loss = loss;
      best = c;
    }
  }
  return best;
}

std::vector<int> confidence_set(const FiniteKernelClass& cls, const StepHistory& history,
                                double gamma_hat) {
  if (gamma_hat < 0.0) throw ValidationError("confidence radius must be nonnegative");
  const double budget = gamma_hat * gamma_hat;
  std::vector<int> members;
  for (int c = 0; c < cls.size(); ++c) {
    double total = 0.0;
    for (const auto& item : history.items)
      total += dist_metric(cls, c, item.estimate, item.s, item.a, item.f);
    if (total <= budget) members.push_back(c);
  }
  return members;
}

double gamma_from_theory(int class_size, int horizon, int num_episodes, double delta) {
  if (class_size < 1 || horizon < 1 || num_episodes < 0 || !(delta > 0.0) || delta > 1.0)
    throw ValidationError("gamma_from_theory: invalid parameters");
  const double h = horizon;
  const double k = std::max(num_episodes, 1);
  return 4.0 * h * h *
         (2.0 * std::log(2.0 * h * class_size / delta) + 1.0 +
          std::sqrt(std::log(5.0 * k * k / delta)));
}

DiameterPoint x_maximizing_diameter(const FiniteKernelClass& cls, std::span<const int> conf_set,
                                    std::span<const double> v_next, int s, int a,
                                    std::span<const double> grid) {
  if (conf_set.empty()) throw ValidationError("x_maximizing_diameter: empty confidence set");
  if (grid.empty()) throw ValidationError("x_maximizing_diameter: empty grid");
  DiameterPoint best{grid[0], -1.0};
  std::vector<double> f(cls.num_states);
  for (double x : grid) {
    for (int sp = 0; sp < cls.num_states; ++sp) f[sp] = std::max(x - v_next[sp], 0.0);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int c : conf_set) {
      const double z = z_value(cls, c, s, a, f);
      lo = std::min(lo, z);
      hi = std::max(hi, z);
    }
    const double diam = hi - lo;
    if (diam > best.g) {
      best.g = diam;
      best.x = x;
    }
  }
  if (best.g < 0.0) best.g = 0.0;
  return best;
}

double optimistic_cvar_sup(const FiniteKernelClass& cls, std::span<const int> conf_set,
                           std::span<const double> v_next, int s, int a, double alpha) {
  if (conf_set.empty()) throw ValidationError("optimistic_cvar_sup: empty confidence set");
  double best = -std::numeric_limits<double>::infinity();
  for (int c : conf_set)
    best = std::max(best, cvar_of(cls.row(c, s, a), v_next, alpha));
  return best;
}

std::vector<double> diameter_grid(const EpsNet& net, std::span<const double> v_next,
                                  double horizon) {
  std::vector<double> grid;
  grid.reserve(net.count + v_next.size() + 2);
  grid.push_back(0.0);
  for (int i = 0; i < net.count; ++i)
    if (net.point(i) <= horizon) grid.push_back(net.point(i));
  grid.push_back(horizon);
  for (double v : v_next)
    if (v > 0.0 && v < horizon) grid.push_back(v);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

RunResult run_icvar_g(const TabularMDP& env, const FiniteKernelClass& cls,
                      const IcvarGConfig& cfg, GTrace* trace) {
  const auto t0 = std::chrono::steady_clock::now();
  check_alpha(cfg.alpha);
  if (cfg.num_episodes < 0) throw ValidationError("episode count must be nonnegative");
  env.validate();
  cls.validate(env.horizon);
  if (cls.num_states != env.num_states || cls.num_actions != env.num_actions)
    throw ValidationError("kernel class shape does not match the environment");
  const int S = env.num_states, A = env.num_actions, H = env.horizon;
  const int N = cls.size();
  const int K = cfg.num_episodes;

  // Precondition: the class contains the true kernel of every step.
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const auto want = env.transition_row_view(h, s, a);
        const auto got = cls.row(cls.true_index[h], s, a);
        for (int sp = 0; sp < S; ++sp)
          if (std::abs(want[sp] - got[sp]) > 1e-12)
            throw ValidationError("kernel class does not contain the true kernel");
      }

  const double gamma =
      cfg.gamma >= 0.0 ? cfg.gamma : gamma_from_theory(N, H, K, cfg.delta);
  const double gamma_sq = gamma * gamma;
  const double grid_eps = cfg.grid_eps > 0.0 ? cfg.grid_eps : H / 64.0;
  const EpsNet net = EpsNet::over_horizon(H, grid_eps);

  const DpResult star = icvar_optimal_dp(env, cfg.alpha);
  const double v_star = star.values.at(0, env.initial_state);

  RunResult out;
  out.algorithm = "icvar_g";
  out.seed = cfg.seed;
  out.horizon = H;
  out.num_episodes = K;
  out.alpha = cfg.alpha;
  out.optimal_value = v_star;
  out.gamma_used = gamma;
  out.grid_eps_used = grid_eps;

  if (trace) {
    trace->history.assign(H, StepHistory{});
    trace->estimate_by_episode.clear();
    trace->conf_by_episode.clear();
    trace->vhat_by_episode.clear();
  }

  // Running per-kernel sums; both are sums of terms fixed at append time, so
  // they match the from-scratch operations exactly.
  std::vector<std::vector<double>> fit_sum(H, std::vector<double>(N, 0.0));
  std::vector<std::vector<double>> dist_sum(H, std::vector<double>(N, 0.0));
  std::vector<int> estimate(H, 0);
  std::vector<std::vector<int>> conf(H);
  for (int h = 0; h < H; ++h) {
    conf[h].resize(N);
    for (int c = 0; c < N; ++c) conf[h][c] = c;
  }

  Rng rng(cfg.seed);
  std::vector<std::vector<double>> v_hat(H + 1, std::vector<double>(S, 0.0));
  std::vector<std::vector<double>> q_hat(H, std::vector<double>(static_cast<std::size_t>(S) * A));
  PolicyTable policy(H, S);
  std::vector<double> f(S);
  std::vector<double> zvals(N);
  double cum = 0.0;

  for (int k = 0; k < K; ++k) {
    // Optimistic value iteration against the current confidence sets.
    for (int h = H - 1; h >= 0; --h) {
      for (int s = 0; s < S; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        int best_a = 0;
        for (int a = 0; a < A; ++a) {
          const double q =
              env.reward(h, s, a) +
              optimistic_cvar_sup(cls, conf[h], v_hat[h + 1], s, a, cfg.alpha);
          q_hat[h][static_cast<std::size_t>(s) * A + a] = q;
          if (q > best) {
            best = q;
            best_a = a;
          }
        }
        v_hat[h][s] = std::min(best, static_cast<double>(H));
        policy.at(h, s) = best_a;
      }
    }

    out.optimism.push_back(v_hat[0][env.initial_state] >= v_star - 1e-9 ? 1 : 0);
    bool member_all = true;
    std::vector<int> sizes(H);
    for (int h = 0; h < H; ++h) {
      sizes[h] = static_cast<int>(conf[h].size());
      if (dist_sum[h][cls.true_index[h]] > gamma_sq) member_all = false;
    }
    out.membership.push_back(member_all ? 1 : 0);
    out.conf_set_size.push_back(std::move(sizes));
    if (trace) {
      trace->estimate_by_episode.push_back(estimate);
      trace->conf_by_episode.push_back(conf);
      trace->vhat_by_episode.push_back(
          std::vector<std::vector<double>>(v_hat.begin(), v_hat.begin() + H));
    }

    // Play greedily; record the diameter-maximizing tuple and update the
    // least-squares estimate and confidence set at each visited step.
    int s = env.initial_state;
    double g_sq = 0.0;
    double worst_excess = 0.0;
    for (int h = 0; h < H; ++h) {
      const int a = policy.at(h, s);
      const auto grid = diameter_grid(net, v_hat[h + 1], H);
      const DiameterPoint dp =
          x_maximizing_diameter(cls, conf[h], v_hat[h + 1], s, a, grid);
      g_sq += dp.g * dp.g;

      const bool member_h = dist_sum[h][cls.true_index[h]] <= gamma_sq;
      if (member_h) {
        const double optimistic =
            q_hat[h][static_cast<std::size_t>(s) * A + a] - env.reward(h, s, a);
        const double exact = cvar_of(env.transition_row_view(h, s, a), v_hat[h + 1], cfg.alpha);
        const double dev = optimistic - exact;
        worst_excess = std::max(worst_excess, std::max(-dev, dev - dp.g / cfg.alpha));
      }

      const int next = rng.categorical(env.transition_row_view(h, s, a));
      for (int sp = 0; sp < S; ++sp) f[sp] = std::max(dp.x - v_hat[h + 1][sp], 0.0);
      const double target = f[next];
      for (int c = 0; c < N; ++c) zvals[c] = z_value(cls, c, s, a, f);
      const double z_est = zvals[estimate[h]];
      for (int c = 0; c < N; ++c) {
        const double resid = target - zvals[c];
        fit_sum[h][c] += resid * resid;
        const double gap = zvals[c] - z_est;
        dist_sum[h][c] += gap * gap;
      }
      if (trace) trace->history[h].items.push_back({s, a, f, target, estimate[h]});

      int best_c = 0;
      double best_loss = std::numeric_limits<double>::infinity();
      for (int c = 0; c < N; ++c)
        if (fit_sum[h][c] < best_loss) {
          best_loss = fit_sum[h][c];
          best_c = c;
        }
      estimate[h] = best_c;
      conf[h].clear();
      for (int c = 0; c < N; ++c)
        if (dist_sum[h][c] <= gamma_sq) conf[h].push_back(c);
      s = next;
    }
    out.g_sq_sum.push_back(g_sq);
    out.deviation_excess.push_back(worst_excess);

    const ValueTable v_pi = icvar_policy_eval(env, policy, cfg.alpha);
    const double gap = v_star - v_pi.at(0, env.initial_state);
    cum += gap;
    out.gap.push_back(gap);
    out.cum_regret.push_back(cum);
  }

  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

namespace {

// Feasibility region of the sequence built along the DFS path: the set of
// admissible independence levels, maintained as sorted disjoint half-open
// intervals. Appending an element intersects the region with the union of
// [sqrt(prefix_sum), gap) intervals over ordered function pairs.
struct EluderSearch {
  const std::vector<std::vector<double>>& fn;
  int num_fn;
  int num_x;
  double eps;
  const EluderBudget& budget;
  long nodes = 0;
  int best = 0;

  std::vector<std::pair<int, int>> pairs;  // ordered pairs p != q
  std::vector<double> pair_sums;           // per pair, sum of squared gaps along the path

  struct Interval {
    double lo, hi;  // [lo, hi)
  };

  std::vector<Interval> element_region(int x) const {
    std::vector<Interval> e;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double gap = fn[pairs[p].first][x] - fn[pairs[p].second][x];
      if (gap <= 0.0) continue;
      const double lo = std::sqrt(pair_sums[p]);
      if (lo < gap) e.push_back({lo, gap});
    }
    std::sort(e.begin(), e.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> merged;
    for (const Interval& iv : e) {
      if (!merged.empty() && iv.lo <= merged.back().hi)
        merged.back().hi = std::max(merged.back().hi, iv.hi);
      else
        merged.push_back(iv);
    }
    return merged;
  }

  static std::vector<Interval> intersect(const std::vector<Interval>& a,
                                         const std::vector<Interval>& b) {
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      const double lo = std::max(a[i].lo, b[j].lo);
      const double hi = std::min(a[i].hi, b[j].hi);
      if (lo < hi) out.push_back({lo, hi});
      if (a[i].hi < b[j].hi)
        ++i;
      else
        ++j;
    }
    return out;
  }

  void dfs(int depth, const std::vector<Interval>& region) {
    if (depth > best) best = depth;
    if (depth == budget.max_depth + 1)
      throw BudgetError("eluder_dimension: a sequence exceeds the depth budget");
    for (int x = 0; x < num_x; ++x) {
      if (++nodes > budget.max_nodes)
        throw BudgetError("eluder_dimension: node budget exceeded");
      const auto elem = element_region(x);
      if (elem.empty()) continue;
      const auto next_region = intersect(region, elem);
      if (next_region.empty()) continue;
      std::vector<double> saved = pair_sums;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const double gap = fn[pairs[p].first][x] - fn[pairs[p].second][x];
        pair_sums[p] += gap * gap;
      }
      dfs(depth + 1, next_region);
      pair_sums = std::move(saved);
    }
  }
};

}  // namespace

int eluder_dimension(const std::vector<std::vector<double>>& functions, double eps,
                     const EluderBudget& budget) {
  if (functions.empty()) throw ValidationError("eluder_dimension: empty function class");
  if (!(eps > 0.0)) throw ValidationError("eluder_dimension: eps must be positive");
  const int num_fn = static_cast<int>(functions.size());
  const int num_x = static_cast<int>(functions[0].size());
  if (num_x == 0) throw ValidationError("eluder_dimension: empty domain");
  for (const auto& f : functions)
    if (static_cast<int>(f.size()) != num_x)
      throw ValidationError("eluder_dimension: ragged function table");
  if (num_fn > budget.max_class)
    throw BudgetError("eluder_dimension: class size exceeds the budget");
  if (num_x > budget.max_domain)
    throw BudgetError("eluder_dimension: domain size exceeds the budget");

  EluderSearch search{functions, num_fn, num_x, eps, budget, 0, 0, {}, {}};
  for (int p = 0; p < num_fn; ++p)
    for (int q = 0; q < num_fn; ++q)
      if (p != q) search.pairs.emplace_back(p, q);
  search.pair_sums.assign(search.pairs.size(), 0.0);
  const std::vector<EluderSearch::Interval> all{{eps, std::numeric_limits<double>::infinity()}};
  search.dfs(0, all);
  return search.best;
}

}  // namespace icvar
