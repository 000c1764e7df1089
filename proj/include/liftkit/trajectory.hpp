#pragma once

#include "liftkit/types.hpp"

namespace liftkit {

/// One simulation rollout: L+1 states and the L inputs that produced them,
/// sampled every h seconds.
struct Trajectory {
  double h = 0.0;
  Matrix states;   // n x (L+1), column k is x_k
  Matrix inputs;   // p x L, column k is u_k held over [k*h, (k+1)*h)

  int state_dim() const { return static_cast<int>(states.rows()); }
  int input_dim() const { return static_cast<int>(inputs.rows()); }
  int length() const { return static_cast<int>(inputs.cols()); }

  void validate() const {
    if (states.cols() != inputs.cols() + 1) {
      throw std::invalid_argument("Trajectory: need L+1 states for L inputs");
    }
    require_finite(states, "Trajectory: states");
    require_finite(inputs, "Trajectory: inputs");
  }
};

}  // namespace liftkit
