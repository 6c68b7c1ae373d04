#include "icvar/risk_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace icvar {

namespace {

constexpr double kQuantileSlack = 1e-12;

struct Atom {
  double value;
  double prob;
};

// Positive-mass atoms sorted by value, equal values merged.
std::vector<Atom> sorted_atoms(std::span<const double> probs, std::span<const double> values) {
  if (probs.size() != values.size())
    throw ValidationError("distribution values and probabilities differ in length");
  std::vector<Atom> atoms;
  atoms.reserve(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] < 0.0) throw ValidationError("negative probability in distribution");
    if (!std::isfinite(values[i])) throw ValidationError("non-finite value in distribution");
    if (probs[i] > 0.0) atoms.push_back({values[i], probs[i]});
  }
  if (atoms.empty()) throw ValidationError("distribution has no positive mass");
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.value < b.value; });
  std::vector<Atom> merged;
  merged.reserve(atoms.size());
  for (const Atom& a : atoms) {
    if (!merged.empty() && merged.back().value == a.value)
      merged.back().prob += a.prob;
    else
      merged.push_back(a);
  }
  return merged;
}

}  // namespace

void DiscreteDistribution::validate() const {
  if (values.size() != probs.size())
    throw ValidationError("distribution values and probabilities differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] < 0.0) throw ValidationError("negative probability in distribution");
    if (!std::isfinite(values[i])) throw ValidationError("non-finite value in distribution");
    sum += probs[i];
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ValidationError("distribution probabilities do not sum to 1");
}

double var_of(std::span<const double> probs, std::span<const double> values, double alpha) {
  check_alpha(alpha);
  const auto atoms = sorted_atoms(probs, values);
  double cum = 0.0;
  for (const Atom& a : atoms) {
    cum += a.prob;
    if (cum >= alpha - kQuantileSlack) return a.value;
  }
  return atoms.back().value;
}

double var_discrete(const DiscreteDistribution& dist, double alpha) {
  dist.validate();
  return var_of(dist.probs, dist.values, alpha);
}

double cvar_of(std::span<const double> probs, std::span<const double> values, double alpha) {
  check_alpha(alpha);
  const auto atoms = sorted_atoms(probs, values);
  double cum = 0.0;
  double x_star = atoms.back().value;
  for (const Atom& a : atoms) {
    cum += a.prob;
    if (cum >= alpha - kQuantileSlack) {
      x_star = a.value;
      break;
    }
  }
  double shortfall = 0.0;
  for (const Atom& a : atoms) {
    if (a.value >= x_star) break;
    shortfall += a.prob * (x_star - a.value);
  }
  return x_star - shortfall / alpha;
}

double cvar_discrete(const DiscreteDistribution& dist, double alpha) {
  dist.validate();
  return cvar_of(dist.probs, dist.values, alpha);
}

std::vector<double> distorted_distribution(std::span<const double> probs,
                                           std::span<const double> values, double alpha) {
  check_alpha(alpha);
  if (probs.size() != values.size())
    throw ValidationError("distribution values and probabilities differ in length");
  const std::size_t n = probs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> q(n, 0.0);
  double cum = 0.0;  // mass strictly before the current atom
  for (std::size_t idx : order) {
    if (cum >= alpha - kQuantileSlack) break;
    const double take = std::min(probs[idx], alpha - cum);
    if (take > 0.0) q[idx] = take / alpha;
    cum += probs[idx];
  }
  return q;
}

double cvar_eps_net(std::span<const double> theta, const LinearMixtureMDP& mdp,
                    std::span<const double> v_next, int s, int a, double alpha,
                    const EpsNet& net) {
  check_alpha(alpha);
  if (net.count < 1) throw ValidationError("cvar_eps_net: empty net");
  if (static_cast<int>(theta.size()) != mdp.dim)
    throw ValidationError("cvar_eps_net: theta dimension mismatch");
  if (static_cast<int>(v_next.size()) != mdp.num_states)
    throw ValidationError("cvar_eps_net: value function dimension mismatch");
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < net.count; ++i) {
    const double x = net.point(i);
    double inner = 0.0;  // <theta, psi_{(x - v)^+}(s,a)>
    for (int sp = 0; sp < mdp.num_states; ++sp) {
      const double w = x - v_next[sp];
      if (w <= 0.0) continue;
      const auto feat = mdp.feature(sp, s, a);
      double fd = 0.0;
      for (int j = 0; j < mdp.dim; ++j) fd += theta[j] * feat[j];
      inner += w * fd;
    }
    best = std::max(best, x - inner / alpha);
  }
  return best;
}

}  // namespace icvar
