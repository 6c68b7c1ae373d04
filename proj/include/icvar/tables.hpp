#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "icvar/common.hpp"

namespace icvar {

// Per-(step, state) values. Steps are 0-based; row `horizon` is the terminal
// all-zero row.
struct ValueTable {
  int horizon = 0;
  int num_states = 0;
  std::vector<double> values;

  ValueTable() = default;
  ValueTable(int horizon_, int num_states_)
      : horizon(horizon_),
        num_states(num_states_),
        values(static_cast<std::size_t>(horizon_ + 1) * num_states_, 0.0) {}

  double& at(int h, int s) { return values[static_cast<std::size_t>(h) * num_states + s]; }
  double at(int h, int s) const { return values[static_cast<std::size_t>(h) * num_states + s]; }

  std::span<const double> row(int h) const {
    return {values.data() + static_cast<std::size_t>(h) * num_states,
            static_cast<std::size_t>(num_states)};
  }
  std::span<double> row(int h) {
    return {values.data() + static_cast<std::size_t>(h) * num_states,
            static_cast<std::size_t>(num_states)};
  }
};

// Deterministic per-(step, state) action choices.
struct PolicyTable {
  int horizon = 0;
  int num_states = 0;
  std::vector<int> actions;

  PolicyTable() = default;
  PolicyTable(int horizon_, int num_states_)
      : horizon(horizon_),
        num_states(num_states_),
        actions(static_cast<std::size_t>(horizon_) * num_states_, 0) {}

  int& at(int h, int s) { return actions[static_cast<std::size_t>(h) * num_states + s]; }
  int at(int h, int s) const { return actions[static_cast<std::size_t>(h) * num_states + s]; }
};

// Discrete net {step, 2*step, ..., count*step} on (0, H]. Zero is excluded;
// H itself is a net point only when H/step is integral.
struct EpsNet {
  double step = 0.0;
  int count = 0;

  static EpsNet over_horizon(int horizon, double eps) {
    if (!(eps > 0.0)) throw ValidationError("eps-net step must be positive");
    EpsNet net;
    net.step = eps;
    net.count = static_cast<int>(std::floor(horizon / eps + 1e-9));
    if (net.count < 1)
      throw ValidationError("eps-net over [0,H] is empty: eps exceeds the horizon");
    return net;
  }

  double point(int i) const { return step * (i + 1); }
  double max_point() const { return step * count; }
};

}  // namespace icvar
