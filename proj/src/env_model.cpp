#include "icvar/env_model.hpp"

#include <cmath>
#include <sstream>

namespace icvar {

namespace {

constexpr double kHardNegativity = 1e-12;   // validation threshold
constexpr double kHardRowDeviation = 1e-9;  // validation threshold
constexpr double kRuntimeRowTolerance = 1e-6;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

void TabularMDP::validate() const {
  const std::size_t want_t = static_cast<std::size_t>(horizon) * num_states * num_actions *
                             num_states;
  const std::size_t want_r = static_cast<std::size_t>(horizon) * num_states * num_actions;
  if (num_states <= 0 || num_actions <= 0 || horizon <= 0)
    throw ValidationError("tabular model dimensions must be positive");
  if (transitions.size() != want_t || rewards.size() != want_r)
    throw ValidationError("tabular model table sizes do not match dimensions");
  if (initial_state < 0 || initial_state >= num_states)
    throw ValidationError("tabular initial state out of range");
  for (int h = 0; h < horizon; ++h)
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a) {
        const auto row = transition_row_view(h, s, a);
        double sum = 0.0;
        for (double p : row) {
          if (p < 0.0) throw ValidationError("tabular transition row has a negative entry");
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
          throw ValidationError("tabular transition row does not sum to 1");
      }
  for (double r : rewards)
    if (r < 0.0 || r > 1.0) throw ValidationError("tabular rewards must lie in [0,1]");
}

void LinearMixtureMDP::check_shapes() const {
  if (num_states <= 0 || num_actions <= 0 || horizon <= 0 || dim <= 0)
    throw ValidationError("mixture model dimensions must be positive");
  const std::size_t want_phi =
      static_cast<std::size_t>(num_states) * num_states * num_actions * dim;
  const std::size_t want_r = static_cast<std::size_t>(horizon) * num_states * num_actions;
  if (phi.size() != want_phi)
    throw ValidationError("feature tensor size does not match (S, S, A, d)");
  if (static_cast<int>(thetas.size()) != horizon)
    throw ValidationError("theta list length does not match the horizon");
  for (const auto& t : thetas)
    if (static_cast<int>(t.size()) != dim)
      throw ValidationError("theta vector dimension does not match d");
  if (rewards.size() != want_r)
    throw ValidationError("reward table size does not match (H, S, A)");
  if (initial_state < 0 || initial_state >= num_states)
    throw ValidationError("mixture initial state out of range");
}

std::vector<double> LinearMixtureMDP::transition_row(int h, int s, int a) const {
  return transition_distribution(*this, h, s, a);
}

std::vector<double> transition_distribution(const LinearMixtureMDP& mdp, int h, int s, int a) {
  if (h < 0 || h >= mdp.horizon || s < 0 || s >= mdp.num_states || a < 0 ||
      a >= mdp.num_actions)
    throw ValidationError("transition_distribution index out of range");
  const auto& theta = mdp.thetas[h];
  std::vector<double> row(mdp.num_states);
  double sum = 0.0;
  for (int sp = 0; sp < mdp.num_states; ++sp) {
    double p = dot(theta, mdp.feature(sp, s, a));
    if (p < 0.0) {
      if (p < -kRuntimeRowTolerance) {
        std::ostringstream msg;
        msg << "transition probability " << p << " at (h=" << h << ", s=" << s << ", a=" << a
            << ", s'=" << sp << ") is negative beyond tolerance";
        throw ValidationError(msg.str());
      }
      p = 0.0;
    }
    row[sp] = p;
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRuntimeRowTolerance) {
    std::ostringstream msg;
    msg << "transition row at (h=" << h << ", s=" << s << ", a=" << a << ") sums to " << sum;
    throw ValidationError(msg.str());
  }
  if (sum != 1.0)
    for (double& p : row) p /= sum;
  return row;
}

std::vector<double> psi_feature(const LinearMixtureMDP& mdp, std::span<const double> f, int s,
                                int a) {
  if (static_cast<int>(f.size()) != mdp.num_states)
    throw ValidationError("psi_feature: f must assign a value to every state");
  if (s < 0 || s >= mdp.num_states || a < 0 || a >= mdp.num_actions)
    throw ValidationError("psi_feature index out of range");
  std::vector<double> psi(mdp.dim, 0.0);
  for (int sp = 0; sp < mdp.num_states; ++sp) {
    const double w = f[sp];
    if (w == 0.0) continue;
    const auto feat = mdp.feature(sp, s, a);
    for (int j = 0; j < mdp.dim; ++j) psi[j] += w * feat[j];
  }
  return psi;
}

MixtureValidationReport validate_mixture(const LinearMixtureMDP& mdp) {
  mdp.check_shapes();
  MixtureValidationReport rep;
  rep.worst_negative_entry = 0.0;
  rep.worst_row_deviation = 0.0;
  for (int h = 0; h < mdp.horizon; ++h) {
    const auto& theta = mdp.thetas[h];
    for (int s = 0; s < mdp.num_states; ++s)
      for (int a = 0; a < mdp.num_actions; ++a) {
        double sum = 0.0;
        for (int sp = 0; sp < mdp.num_states; ++sp) {
          const double p = dot(theta, mdp.feature(sp, s, a));
          sum += p;
          if (p < rep.worst_negative_entry) rep.worst_negative_entry = p;
        }
        const double dev = std::abs(sum - 1.0);
        if (dev > rep.worst_row_deviation) {
          rep.worst_row_deviation = dev;
          rep.worst_h = h;
          rep.worst_s = s;
          rep.worst_a = a;
        }
      }
    double norm_sq = 0.0;
    for (double t : theta) norm_sq += t * t;
    const double excess = std::sqrt(norm_sq) - std::sqrt(static_cast<double>(mdp.dim));
    if (excess > rep.worst_theta_norm_excess) rep.worst_theta_norm_excess = excess;
  }
  // psi-norm bound spot-checked on indicator functions: psi_{1_{s'}} = phi(s',s,a).
  for (int sp = 0; sp < mdp.num_states; ++sp)
    for (int s = 0; s < mdp.num_states; ++s)
      for (int a = 0; a < mdp.num_actions; ++a) {
        const auto feat = mdp.feature(sp, s, a);
        double norm_sq = 0.0;
        for (double v : feat) norm_sq += v * v;
        const double excess = std::sqrt(norm_sq) - 1.0;
        if (excess > rep.worst_psi_indicator_norm_excess)
          rep.worst_psi_indicator_norm_excess = excess;
      }
  for (double r : mdp.rewards)
    if (r < 0.0 || r > 1.0)
      throw ValidationError("mixture rewards must lie in [0,1]");
  rep.pass = rep.worst_negative_entry >= -kHardNegativity &&
             rep.worst_row_deviation <= kHardRowDeviation;
  return rep;
}

std::string MixtureValidationReport::summary() const {
  std::ostringstream out;
  out << (pass ? "PASS" : "FAIL") << ": worst negative entry " << worst_negative_entry
      << ", worst row deviation " << worst_row_deviation;
  if (worst_h >= 0)
    out << " at (h=" << worst_h << ", s=" << worst_s << ", a=" << worst_a << ")";
  out << "; advisory: theta norm excess " << worst_theta_norm_excess
      << ", psi indicator norm excess " << worst_psi_indicator_norm_excess;
  return out.str();
}

LinearMixtureMDP embed_tabular(const TabularMDP& tab) {
  tab.validate();
  const int S = tab.num_states, A = tab.num_actions, H = tab.horizon;
  LinearMixtureMDP m;
  m.num_states = S;
  m.num_actions = A;
  m.horizon = H;
  m.dim = S * S * A;
  m.initial_state = tab.initial_state;
  m.rewards = tab.rewards;
  m.phi.assign(static_cast<std::size_t>(S) * S * A * m.dim, 0.0);
  for (int sp = 0; sp < S; ++sp)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const std::size_t flat = (static_cast<std::size_t>(sp) * S + s) * A + a;
        m.phi[flat * m.dim + flat] = 1.0;
      }
  m.thetas.assign(H, std::vector<double>(m.dim, 0.0));
  for (int h = 0; h < H; ++h)
    for (int sp = 0; sp < S; ++sp)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          const std::size_t flat = (static_cast<std::size_t>(sp) * S + s) * A + a;
          m.thetas[h][flat] = tab.transition_row_view(h, s, a)[sp];
        }
  return m;
}

TabularMDP materialize_tabular(const LinearMixtureMDP& mdp) {
  mdp.check_shapes();
  const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
  TabularMDP tab;
  tab.num_states = S;
  tab.num_actions = A;
  tab.horizon = H;
  tab.initial_state = mdp.initial_state;
  tab.rewards = mdp.rewards;
  tab.transitions.resize(static_cast<std::size_t>(H) * S * A * S);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const auto row = transition_distribution(mdp, h, s, a);
        const std::size_t base =
            ((static_cast<std::size_t>(h) * S + s) * A + a) * static_cast<std::size_t>(S);
        for (int sp = 0; sp < S; ++sp) tab.transitions[base + sp] = row[sp];
      }
  return tab;
}

}  // namespace icvar
