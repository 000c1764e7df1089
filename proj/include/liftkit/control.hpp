#pragma once

#include "liftkit/dynamics.hpp"
#include "liftkit/numerics.hpp"
#include "liftkit/predictor.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace liftkit {

/// Infinite-horizon quadratic weights on the lifted state and input.
struct LqrSpec {
  Matrix Q;   // N x N, PSD
  Matrix R;   // p x p, PD
  Matrix S;   // N x p cross term; empty = zero
};

/// Lifts an original-state weight through the predictor output map:
/// Q = C' Qx C, so the lifted design penalizes the same physical quantity.
Matrix lifted_state_cost(const LiftedLinearPredictor& pred, const Matrix& Qx);

/// State-feedback law u = -K (Psi(x) - z_ref).
struct LqrController {
  Matrix K;
  LiftingMap map;
  Vector z_ref;   // empty = regulation to the lifted origin

  Vector input(const Vector& x) const;
};

LqrController lqr_gain(const LiftedLinearPredictor& pred, const LqrSpec& spec,
                       const Vector* x_ref = nullptr);

/// Receding-horizon tracking MPC on the predictor, condensed to a
/// box-constrained QP over the stacked input sequence.
struct MpcSpec {
  int horizon = 50;
  Matrix Q;    // output-space stage weight (n x n)
  Matrix QN;   // terminal weight
  Matrix R;    // p x p
  Vector u_min, u_max;               // per input
  Vector z_min, z_max;               // per lifted state; empty = unbounded
  double qp_tol = 1e-7;
  int qp_max_iter = 200000;
  double soft_state_penalty = 1e6;   // quadratic weight on state-bound violation
};

struct MpcStepResult {
  Vector u;            // first input of the optimal sequence
  Vector sequence;     // full stacked sequence (warm start for the next step)
  int qp_iterations = 0;
  double kkt_residual = 0.0;
  bool softened = false;   // state bounds handled by penalty
};

class MpcController {
 public:
  MpcController(LiftedLinearPredictor pred, MpcSpec spec);

  /// Solves the condensed QP for the current state. refs must provide
  /// horizon+1 output references r_0..r_Np (r_0 only fixes the constant
  /// term and does not affect the optimizer).
  MpcStepResult step(const Vector& x_now, const std::vector<Vector>& refs,
                     const Vector* warm_start = nullptr) const;

  const LiftedLinearPredictor& predictor() const { return pred_; }
  const MpcSpec& spec() const { return spec_; }

 private:
  LiftedLinearPredictor pred_;
  MpcSpec spec_;
  Matrix gamma_;        // stacked input-to-output map over the horizon
  Matrix phi_;          // stacked z0-to-output map
  Matrix zgamma_;       // stacked input-to-lifted-state map (state bounds)
  Matrix zphi_;
  Matrix hessian_;
  Matrix gamma_t_qbar_;
  Vector lo_, hi_;
  bool has_state_bounds_ = false;
};

MpcStepResult mpc_step(const MpcController& mpc, const Vector& x_now,
                       const std::vector<Vector>& refs, const Vector* warm_start = nullptr);

using ReferenceFn = std::function<Vector(double)>;

struct ClosedLoopOptions {
  double duration_s = 5.0;
  double h = 0.01;
  double divergence_norm = 1e6;
  bool warm_start = true;   // MPC only
};

struct ClosedLoopResult {
  Trajectory trajectory;
  Matrix references;                 // n x (L+1), reference at each sample
  std::vector<std::string> status;   // one entry per applied input
  bool failed = false;
  double failure_time = -1.0;
  std::string failure_reason;

  /// Accumulated sum of x'Qx x + u'R u over the applied steps.
  double quadratic_cost(const Matrix& Qx, const Matrix& R) const;
};

ClosedLoopResult run_closed_loop(const ContinuousSystem& plant, const LqrController& ctrl,
                                 const Vector& x0, const ClosedLoopOptions& opts,
                                 const ReferenceFn& ref = {});

ClosedLoopResult run_closed_loop(const ContinuousSystem& plant, const MpcController& ctrl,
                                 const Vector& x0, const ClosedLoopOptions& opts,
                                 const ReferenceFn& ref = {});

/// Closed-loop CSV: trajectory columns plus reference and status columns.
std::string closed_loop_csv(const ClosedLoopResult& result);

}  // namespace liftkit
