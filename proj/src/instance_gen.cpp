#include "icvar/instance_gen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace icvar {

void HardInstanceParams::validate() const {
  if (dim < 2) throw ValidationError("hard instance requires d >= 2");
  if (horizon < 2) throw ValidationError("hard instance requires H >= 2");
  if (chain_length < 1 || chain_length > horizon - 1)
    throw ValidationError("hard instance requires n in [1, H-1]");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw ValidationError("hard instance requires alpha in (0, 1]");
  if (!(delta_gap > 0.0)) throw ValidationError("hard instance requires Delta > 0");
  if (2.0 * (dim - 1) * delta_gap >= alpha / 2.0) {
    std::ostringstream msg;
    msg << "hard instance requires 2(d-1)Delta < alpha/2, got 2*" << (dim - 1) << "*"
        << delta_gap << " vs " << alpha / 2.0;
    throw ValidationError(msg.str());
  }
  if (static_cast<int>(mu.size()) != dim - 1)
    throw ValidationError("hard instance mu must have d-1 entries");
  for (double m : mu)
    if (std::abs(std::abs(m) - delta_gap) > 1e-15)
      throw ValidationError("hard instance mu entries must be +-Delta");
}

int hard_num_actions(int dim) { return 1 << (dim - 1); }

std::vector<int> action_signs(int action, int dim) {
  std::vector<int> signs(dim - 1);
  for (int i = 0; i < dim - 1; ++i) signs[i] = (action >> i) & 1 ? 1 : -1;
  return signs;
}

int signs_to_action(std::span<const int> signs) {
  int a = 0;
  for (std::size_t i = 0; i < signs.size(); ++i)
    if (signs[i] > 0) a |= 1 << i;
  return a;
}

int optimal_hard_action(const HardInstanceParams& p) {
  int a = 0;
  for (int i = 0; i < p.dim - 1; ++i)
    if (p.mu[i] > 0.0) a |= 1 << i;
  return a;
}

LinearMixtureMDP hard_instance(const HardInstanceParams& p) {
  p.validate();
  const int n = p.chain_length;
  const int S = n + 3;
  const int A = hard_num_actions(p.dim);
  const int bandit = n - 1;               // state s_n
  const int x1 = n, x2 = n + 1, x3 = n + 2;
  const double c = (p.dim - 1) * p.delta_gap;

  LinearMixtureMDP m;
  m.num_states = S;
  m.num_actions = A;
  m.horizon = p.horizon;
  m.dim = p.dim;
  m.initial_state = 0;
  m.phi.assign(static_cast<std::size_t>(S) * S * A * p.dim, 0.0);
  auto phi_at = [&](int sp, int s, int a) {
    return m.phi.data() +
           ((static_cast<std::size_t>(sp) * S + s) * A + a) * static_cast<std::size_t>(p.dim);
  };

  // Chain: s_i -> s_{i+1} with mass alpha, escape to x1 otherwise.
  for (int i = 0; i + 1 < n; ++i)
    for (int a = 0; a < A; ++a) {
      phi_at(i + 1, i, a)[0] = p.alpha;
      phi_at(x1, i, a)[0] = 1.0 - p.alpha;
    }
  // Bandit state: outcome probabilities carry the action signs. The x3 block
  // enters with negative sign so that <theta, phi> reproduces
  // alpha - (d-1)Delta - <mu, a>.
  for (int a = 0; a < A; ++a) {
    const auto signs = action_signs(a, p.dim);
    double* f2 = phi_at(x2, bandit, a);
    double* f3 = phi_at(x3, bandit, a);
    f2[0] = 1.0 - p.alpha + c;
    f3[0] = p.alpha - c;
    for (int i = 0; i < p.dim - 1; ++i) {
      f2[i + 1] = static_cast<double>(signs[i]);
      f3[i + 1] = -static_cast<double>(signs[i]);
    }
  }
  // Absorbing states.
  for (int x : {x1, x2, x3})
    for (int a = 0; a < A; ++a) phi_at(x, x, a)[0] = 1.0;

  std::vector<double> theta(p.dim, 0.0);
  theta[0] = 1.0;
  for (int i = 0; i < p.dim - 1; ++i) theta[i + 1] = p.mu[i];
  m.thetas.assign(p.horizon, theta);

  m.rewards.assign(static_cast<std::size_t>(p.horizon) * S * A, 0.0);
  for (int h = 0; h < p.horizon; ++h)
    for (int a = 0; a < A; ++a) {
      m.rewards[(static_cast<std::size_t>(h) * S + x1) * A + a] = 1.0;
      m.rewards[(static_cast<std::size_t>(h) * S + x2) * A + a] = 0.8;
      m.rewards[(static_cast<std::size_t>(h) * S + x3) * A + a] = 0.2;
    }
  return m;
}

double hard_instance_gap(const HardInstanceParams& p, int action) {
  p.validate();
  if (action < 0 || action >= hard_num_actions(p.dim))
    throw ValidationError("hard_instance_gap: action out of range");
  const auto signs = action_signs(action, p.dim);
  int mismatches = 0;
  for (int i = 0; i < p.dim - 1; ++i) {
    const int mu_sign = p.mu[i] > 0.0 ? 1 : -1;
    if (mu_sign != signs[i]) ++mismatches;
  }
  return 1.2 * (p.horizon - p.chain_length) * p.delta_gap / p.alpha * mismatches;
}

double theory_delta(int dim, int chain_length, double alpha, int num_episodes, double c) {
  if (dim < 2 || chain_length < 1 || !(alpha > 0.0) || alpha > 1.0 || c <= 0.0)
    throw ValidationError("theory_delta: invalid parameters");
  const double k = std::max(num_episodes, 1);
  const double raw = c * std::sqrt(1.0 / (std::pow(alpha, chain_length - 2) * k));
  const double clamp = 0.9 * alpha / (4.0 * (dim - 1));
  return std::min(raw, clamp);
}

std::vector<double> random_mu(int dim, double delta_gap, Rng& rng) {
  std::vector<double> mu(dim - 1);
  for (auto& m : mu) m = rng.coin() ? delta_gap : -delta_gap;
  return mu;
}

LinearMixtureMDP random_linear_mixture(int dim, int num_states, int num_actions, int horizon,
                                       std::uint64_t seed) {
  if (dim < 1 || num_states < 1 || num_actions < 1 || horizon < 1)
    throw ValidationError("random_linear_mixture: dimensions must be positive");
  if (dim > num_states)
    throw ValidationError("random_linear_mixture requires d <= S");
  Rng rng(seed);
  const int S = num_states, A = num_actions;
  // Anchor kernels: phi(s',s,a) coordinate j is anchor_j(s'|s,a).
  std::vector<std::vector<double>> anchors(dim);
  for (auto& anchor : anchors) {
    anchor.resize(static_cast<std::size_t>(S) * A * S);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const auto row = random_distribution(S, rng);
        for (int sp = 0; sp < S; ++sp)
          anchor[(static_cast<std::size_t>(s) * A + a) * S + sp] = row[sp];
      }
  }
  LinearMixtureMDP m;
  m.num_states = S;
  m.num_actions = A;
  m.horizon = horizon;
  m.dim = dim;
  m.initial_state = 0;
  m.phi.resize(static_cast<std::size_t>(S) * S * A * dim);
  for (int sp = 0; sp < S; ++sp)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        double* f =
            m.phi.data() +
            ((static_cast<std::size_t>(sp) * S + s) * A + a) * static_cast<std::size_t>(dim);
        for (int j = 0; j < dim; ++j)
          f[j] = anchors[j][(static_cast<std::size_t>(s) * A + a) * S + sp];
      }
  m.thetas.resize(horizon);
  for (int h = 0; h < horizon; ++h) m.thetas[h] = random_distribution(dim, rng);
  m.rewards.resize(static_cast<std::size_t>(horizon) * S * A);
  for (auto& r : m.rewards) r = rng.uniform01();
  return m;
}

TabularMDP random_tabular(int num_states, int num_actions, int horizon, std::uint64_t seed) {
  if (num_states < 1 || num_actions < 1 || horizon < 1)
    throw ValidationError("random_tabular: dimensions must be positive");
  Rng rng(seed);
  TabularMDP tab;
  tab.num_states = num_states;
  tab.num_actions = num_actions;
  tab.horizon = horizon;
  tab.initial_state = 0;
  tab.transitions.resize(static_cast<std::size_t>(horizon) * num_states * num_actions *
                         num_states);
  for (int h = 0; h < horizon; ++h)
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a) {
        const auto row = random_distribution(num_states, rng);
        const std::size_t base =
            ((static_cast<std::size_t>(h) * num_states + s) * num_actions + a) *
            static_cast<std::size_t>(num_states);
        for (int sp = 0; sp < num_states; ++sp) tab.transitions[base + sp] = row[sp];
      }
  tab.rewards.resize(static_cast<std::size_t>(horizon) * num_states * num_actions);
  for (auto& r : tab.rewards) r = rng.uniform01();
  return tab;
}

FiniteKernelClass kernel_class_around(const TabularMDP& env, int num_distractors,
                                      std::uint64_t seed) {
  env.validate();
  if (num_distractors < 0)
    throw ValidationError("kernel_class_around: distractor count must be nonnegative");
  const int S = env.num_states, A = env.num_actions, H = env.horizon;
  FiniteKernelClass cls;
  cls.num_states = S;
  cls.num_actions = A;
  cls.true_index.resize(H);
  for (int h = 0; h < H; ++h) {
    std::vector<double> table(static_cast<std::size_t>(S) * A * S);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const auto row = env.transition_row_view(h, s, a);
        for (int sp = 0; sp < S; ++sp)
          table[(static_cast<std::size_t>(s) * A + a) * S + sp] = row[sp];
      }
    int found = -1;
    for (std::size_t i = 0; i < cls.kernels.size(); ++i)
      if (cls.kernels[i] == table) {
        found = static_cast<int>(i);
        break;
      }
    if (found < 0) {
      cls.kernels.push_back(std::move(table));
      found = static_cast<int>(cls.kernels.size()) - 1;
    }
    cls.true_index[h] = found;
  }
  Rng rng(seed);
  for (int i = 0; i < num_distractors; ++i) {
    std::vector<double> table(static_cast<std::size_t>(S) * A * S);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const auto row = random_distribution(S, rng);
        for (int sp = 0; sp < S; ++sp)
          table[(static_cast<std::size_t>(s) * A + a) * S + sp] = row[sp];
      }
    cls.kernels.push_back(std::move(table));
  }
  return cls;
}

}  // namespace icvar
