#include "liftkit/control.hpp"

#include "liftkit/io.hpp"

#include <cmath>

namespace liftkit {

Matrix lifted_state_cost(const LiftedLinearPredictor& pred, const Matrix& Qx) {
  if (Qx.rows() != pred.state_dim() || Qx.cols() != pred.state_dim()) {
    throw std::invalid_argument("lifted_state_cost: Qx must be state_dim x state_dim");
  }
  return pred.C.transpose() * Qx * pred.C;
}

Vector LqrController::input(const Vector& x) const {
  Vector z = map.lift(x);
  if (z_ref.size()) z -= z_ref;
  return -K * z;
}

LqrController lqr_gain(const LiftedLinearPredictor& pred, const LqrSpec& spec,
                       const Vector* x_ref) {
  const DareSolution sol = solve_dare(pred.A, pred.B, spec.Q, spec.R, spec.S);
  LqrController ctrl;
  ctrl.K = sol.K;
  ctrl.map = pred.map;
  if (x_ref) ctrl.z_ref = pred.map.lift(*x_ref);
  return ctrl;
}

MpcController::MpcController(LiftedLinearPredictor pred, MpcSpec spec)
    : pred_(std::move(pred)), spec_(std::move(spec)) {
  pred_.validate();
  const int N = pred_.lifted_dim();
  const int n = pred_.state_dim();
  const int p = pred_.input_dim();
  const int Np = spec_.horizon;
  if (Np < 1) throw std::invalid_argument("MpcController: horizon must be >= 1");
  if (spec_.Q.rows() != n || spec_.QN.rows() != n || spec_.R.rows() != p) {
    throw std::invalid_argument("MpcController: weight dimensions do not match predictor");
  }
  if (spec_.u_min.size() != p || spec_.u_max.size() != p) {
    throw std::invalid_argument("MpcController: input bounds must have input_dim entries");
  }
  has_state_bounds_ = spec_.z_min.size() > 0 || spec_.z_max.size() > 0;
  if (has_state_bounds_ &&
      (spec_.z_min.size() != N || spec_.z_max.size() != N)) {
    throw std::invalid_argument("MpcController: lifted-state bounds must have N entries");
  }

  // Stacked prediction maps over k = 1..Np:
  //   z_k = A^k z0 + sum_j A^(k-1-j) B u_j.
  std::vector<Matrix> a_pow(Np + 1);
  a_pow[0] = Matrix::Identity(N, N);
  for (int k = 1; k <= Np; ++k) a_pow[k] = pred_.A * a_pow[k - 1];

  zgamma_ = Matrix::Zero(Np * N, Np * p);
  zphi_ = Matrix::Zero(Np * N, N);
  for (int k = 1; k <= Np; ++k) {
    zphi_.middleRows((k - 1) * N, N) = a_pow[k];
    for (int j = 0; j < k; ++j) {
      zgamma_.block((k - 1) * N, j * p, N, p) = a_pow[k - 1 - j] * pred_.B;
    }
  }

  gamma_ = Matrix::Zero(Np * n, Np * p);
  phi_ = Matrix::Zero(Np * n, N);
  for (int k = 0; k < Np; ++k) {
    gamma_.middleRows(k * n, n) = pred_.C * zgamma_.middleRows(k * N, N);
    phi_.middleRows(k * n, n) = pred_.C * zphi_.middleRows(k * N, N);
  }

  Matrix qbar = Matrix::Zero(Np * n, Np * n);
  for (int k = 0; k < Np; ++k) {
    qbar.block(k * n, k * n, n, n) = (k == Np - 1) ? spec_.QN : spec_.Q;
  }
  Matrix rbar = Matrix::Zero(Np * p, Np * p);
  for (int k = 0; k < Np; ++k) rbar.block(k * p, k * p, p, p) = spec_.R;

  hessian_ = 2.0 * (gamma_.transpose() * qbar * gamma_ + rbar);
  hessian_ = 0.5 * (hessian_ + hessian_.transpose());

  lo_.resize(Np * p);
  hi_.resize(Np * p);
  for (int k = 0; k < Np; ++k) {
    lo_.segment(k * p, p) = spec_.u_min;
    hi_.segment(k * p, p) = spec_.u_max;
  }
  // Cached for the linear term: g = -2 Gamma' Qbar (rbar_refs - Phi z0).
  gamma_t_qbar_ = gamma_.transpose() * qbar;
}

MpcStepResult MpcController::step(const Vector& x_now, const std::vector<Vector>& refs,
                                  const Vector* warm_start) const {
  const int n = pred_.state_dim();
  const int p = pred_.input_dim();
  const int Np = spec_.horizon;
  if (static_cast<int>(refs.size()) < Np + 1) {
    throw std::invalid_argument("mpc_step: need horizon+1 references");
  }
  require_finite(x_now, "mpc_step: state");

  const Vector z0 = pred_.map.lift(x_now);
  Vector rstack(Np * n);
  for (int k = 1; k <= Np; ++k) rstack.segment((k - 1) * n, n) = refs[k];

  QpProblem qp;
  qp.H = hessian_;
  qp.g = -2.0 * (gamma_t_qbar_ * (rstack - phi_ * z0));
  qp.lower = lo_;
  qp.upper = hi_;

  MpcStepResult out;
  QpSolution sol = solve_qp(qp, spec_.qp_tol, spec_.qp_max_iter, warm_start);

  if (has_state_bounds_) {
    // Soft state bounds: re-solve with a quadratic penalty on the violated
    // rows until the active set stops changing.
    const int N = pred_.lifted_dim();
    for (int pass = 0; pass < 10; ++pass) {
      const Vector zs = zphi_ * z0 + zgamma_ * sol.x;
      std::vector<std::pair<int, double>> violations;   // row, bound (+upper/-lower)
      for (int k = 0; k < Np; ++k) {
        for (int i = 0; i < N; ++i) {
          const double v = zs(k * N + i);
          if (spec_.z_max.size() && v > spec_.z_max(i)) {
            violations.emplace_back(k * N + i, spec_.z_max(i));
          } else if (spec_.z_min.size() && v < spec_.z_min(i)) {
            violations.emplace_back(-(k * N + i) - 1, spec_.z_min(i));
          }
        }
      }
      if (violations.empty()) break;
      out.softened = true;
      QpProblem soft = qp;
      for (const auto& [signed_row, bound] : violations) {
        const int row = signed_row >= 0 ? signed_row : -signed_row - 1;
        const Vector a = zgamma_.row(row).transpose();
        const double offset = (zphi_.row(row) * z0).value() - bound;
        soft.H += 2.0 * spec_.soft_state_penalty * (a * a.transpose());
        soft.g += 2.0 * spec_.soft_state_penalty * offset * a;
      }
      soft.H = 0.5 * (soft.H + soft.H.transpose());
      sol = solve_qp(soft, spec_.qp_tol, spec_.qp_max_iter, &sol.x);
    }
  }

  out.u = sol.x.head(p);
  out.sequence = sol.x;
  out.qp_iterations = sol.iterations;
  out.kkt_residual = sol.kkt_residual;
  return out;
}

MpcStepResult mpc_step(const MpcController& mpc, const Vector& x_now,
                       const std::vector<Vector>& refs, const Vector* warm_start) {
  return mpc.step(x_now, refs, warm_start);
}

namespace {

struct LawResult {
  Vector u;
  std::string status;
};

ClosedLoopResult run_loop(const ContinuousSystem& plant, const Vector& x0,
                          const ClosedLoopOptions& opts, const ReferenceFn& ref, double h,
                          const std::function<LawResult(const Vector&, double)>& law) {
  const int steps = static_cast<int>(std::lround(opts.duration_s / h));
  ClosedLoopResult res;
  res.trajectory.h = h;
  res.trajectory.states.resize(plant.state_dim, steps + 1);
  res.trajectory.inputs.resize(plant.input_dim, steps);
  res.references = Matrix::Zero(plant.state_dim, steps + 1);
  res.trajectory.states.col(0) = x0;
  if (ref) res.references.col(0) = ref(0.0);

  int k = 0;
  for (; k < steps; ++k) {
    const double t = k * h;
    const Vector x = res.trajectory.states.col(k);
    LawResult lr;
    try {
      lr = law(x, t);
    } catch (const NumericsError& e) {
      res.failed = true;
      res.failure_time = t;
      res.failure_reason = std::string("controller: ") + e.what();
      break;
    }
    res.trajectory.inputs.col(k) = lr.u;
    res.status.push_back(lr.status);
    Vector next;
    try {
      next = rk4_step(plant, x, lr.u, h);
    } catch (const DivergenceError& e) {
      res.failed = true;
      res.failure_time = t;
      res.failure_reason = std::string("plant: ") + e.what();
      break;
    }
    if (next.norm() > opts.divergence_norm) {
      res.failed = true;
      res.failure_time = t;
      res.failure_reason = "plant: state norm exceeded divergence threshold";
      break;
    }
    res.trajectory.states.col(k + 1) = next;
    if (ref) res.references.col(k + 1) = ref((k + 1) * h);
  }
  if (res.failed) {
    res.trajectory.states.conservativeResize(Eigen::NoChange, k + 1);
    res.trajectory.inputs.conservativeResize(Eigen::NoChange, k);
    res.references.conservativeResize(Eigen::NoChange, k + 1);
  }
  return res;
}

}  // namespace

ClosedLoopResult run_closed_loop(const ContinuousSystem& plant, const LqrController& ctrl,
                                 const Vector& x0, const ClosedLoopOptions& opts,
                                 const ReferenceFn& ref) {
  return run_loop(plant, x0, opts, ref, opts.h,
                  [&](const Vector& x, double t) -> LawResult {
                    Vector z = ctrl.map.lift(x);
                    if (ref) {
                      z -= ctrl.map.lift(ref(t));
                    } else if (ctrl.z_ref.size()) {
                      z -= ctrl.z_ref;
                    }
                    return LawResult{-ctrl.K * z, "ok"};
                  });
}

ClosedLoopResult run_closed_loop(const ContinuousSystem& plant, const MpcController& ctrl,
                                 const Vector& x0, const ClosedLoopOptions& opts,
                                 const ReferenceFn& ref) {
  const int Np = ctrl.spec().horizon;
  const int n = ctrl.predictor().state_dim();
  const int p = ctrl.predictor().input_dim();
  const double h = opts.h;
  Vector warm;
  return run_loop(plant, x0, opts, ref, h,
                  [&, Np, n, p](const Vector& x, double t) -> LawResult {
                    std::vector<Vector> refs(Np + 1, Vector::Zero(n));
                    if (ref) {
                      for (int k = 0; k <= Np; ++k) refs[k] = ref(t + k * h);
                    }
                    const Vector* ws =
                        (opts.warm_start && warm.size()) ? &warm : nullptr;
                    const MpcStepResult r = ctrl.step(x, refs, ws);
                    if (opts.warm_start) {
                      // Shift by one step and repeat the tail block.
                      warm = r.sequence;
                      warm.head((Np - 1) * p) = r.sequence.tail((Np - 1) * p);
                      warm.tail(p) = r.sequence.tail(p);
                    }
                    return LawResult{
                        r.u, "qp_iters=" + std::to_string(r.qp_iterations) +
                                 (r.softened ? ",softened" : "")};
                  });
}

double ClosedLoopResult::quadratic_cost(const Matrix& Qx, const Matrix& R) const {
  double cost = 0.0;
  for (int k = 0; k < trajectory.length(); ++k) {
    const Vector x = trajectory.states.col(k);
    const Vector u = trajectory.inputs.col(k);
    cost += (x.transpose() * Qx * x).value() + (u.transpose() * R * u).value();
  }
  return cost;
}

std::string closed_loop_csv(const ClosedLoopResult& result) {
  const Trajectory& t = result.trajectory;
  const int n = t.state_dim();
  const int p = t.input_dim();
  std::string out = "t";
  for (int i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  for (int i = 1; i <= p; ++i) out += ",u" + std::to_string(i);
  for (int i = 1; i <= n; ++i) out += ",r" + std::to_string(i);
  out += ",status\n";
  for (int k = 0; k <= t.length(); ++k) {
    out += format_double(k * t.h);
    for (int i = 0; i < n; ++i) out += "," + format_double(t.states(i, k));
    for (int i = 0; i < p; ++i) {
      out += ",";
      if (k < t.length()) out += format_double(t.inputs(i, k));
    }
    for (int i = 0; i < n; ++i) out += "," + format_double(result.references(i, k));
    out += ",";
    if (k < t.length() && k < static_cast<int>(result.status.size())) {
      out += result.status[k];
    }
    out += "\n";
  }
  return out;
}

}  // namespace liftkit
