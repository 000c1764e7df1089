#include "liftkit/dynamics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace liftkit {

Vector rk4_step(const ContinuousSystem& sys, const Vector& x, const Vector& u, double h) {
  if (h <= 0.0) throw std::invalid_argument("rk4_step: h must be positive");
  const Vector k1 = sys.f(x, u);
  const Vector k2 = sys.f(x + 0.5 * h * k1, u);
  const Vector k3 = sys.f(x + 0.5 * h * k2, u);
  const Vector k4 = sys.f(x + h * k3, u);
  Vector next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) {
    throw DivergenceError(sys.name + ": non-finite state after RK4 step", 0);
  }
  return next;
}

Trajectory simulate(const ContinuousSystem& sys, const Vector& x0, const Matrix& inputs,
                    double h) {
  const Eigen::Index L = inputs.cols();
  if (L < 1) throw std::invalid_argument("simulate: need at least one input");
  Trajectory t;
  t.h = h;
  t.states.resize(sys.state_dim, L + 1);
  t.inputs = inputs;
  t.states.col(0) = x0;
  for (Eigen::Index k = 0; k < L; ++k) {
    try {
      t.states.col(k + 1) = rk4_step(sys, t.states.col(k), inputs.col(k), h);
    } catch (const DivergenceError&) {
      throw DivergenceError(sys.name + ": trajectory diverged", static_cast<long>(k));
    }
  }
  return t;
}

ContinuousSystem pendulum(const PendulumParams& params) {
  if (params.m <= 0 || params.l <= 0 || params.g <= 0 || params.gamma < 0) {
    throw ConfigError("pendulum: invalid parameters");
  }
  const double gl = params.g / params.l;
  const double inv_ml2 = 1.0 / (params.m * params.l * params.l);
  const double damp = params.gamma * inv_ml2;
  ContinuousSystem sys;
  sys.state_dim = 2;
  sys.input_dim = 1;
  sys.name = "pendulum";
  sys.f = [gl, inv_ml2, damp](const Vector& x, const Vector& u) -> Vector {
    Vector dx(2);
    dx(0) = x(1);
    dx(1) = gl * std::sin(x(0)) - damp * x(1) + inv_ml2 * u(0);
    return dx;
  };
  return sys;
}

ContinuousSystem robot(const RobotParams& rp) {
  if (rp.wheel_radius <= 0 || rp.wheel_mass <= 0 || rp.body_mass <= 0 ||
      rp.com_height <= 0 || rp.track_width <= 0 || rp.viscous_friction < 0) {
    throw ConfigError("robot: invalid parameters");
  }
  ContinuousSystem sys;
  sys.state_dim = 6;   // [sdot, phidot, chidot, s, phi, chi]
  sys.input_dim = 2;
  sys.name = "robot";
  sys.f = [rp](const Vector& x, const Vector& u) -> Vector {
    const double sdot = x(0);
    const double phidot = x(1);
    const double chidot = x(2);
    const double phi = x(4);

    const double r = rp.wheel_radius;
    const double w = rp.track_width;
    const double md = rp.body_mass * rp.com_height;
    const double cphi = std::cos(phi);
    const double sphi = std::sin(phi);

    // Translational mass including wheel spin inertia reflected through
    // the rolling constraint.
    const double m_t =
        rp.body_mass + 2.0 * rp.wheel_mass + 2.0 * rp.wheel_spin_inertia / (r * r);
    const double j_phi = rp.pitch_inertia + md * rp.com_height;
    const double mu = rp.roll_inertia + md * rp.com_height - rp.yaw_inertia;
    const double j_chi = rp.yaw_inertia * cphi * cphi + rp.roll_inertia * sphi * sphi +
                         md * rp.com_height * sphi * sphi +
                         2.0 * rp.wheel_yaw_inertia +
                         (rp.wheel_mass + rp.wheel_spin_inertia / (r * r)) * w * w / 2.0;

    Eigen::Matrix3d M;
    M << m_t, md * cphi, 0.0,
         md * cphi, j_phi, 0.0,
         0.0, 0.0, j_chi;

    Eigen::Vector3d coriolis;
    coriolis << -md * sphi * phidot * phidot,
                -mu * sphi * cphi * chidot * chidot,
                2.0 * mu * sphi * cphi * phidot * chidot;

    Eigen::Vector3d gravity;
    gravity << 0.0, -md * rp.g * sphi, 0.0;

    const double cv = rp.viscous_friction;
    Eigen::Vector3d friction;
    friction << (2.0 * cv / (r * r)) * sdot - (2.0 * cv / r) * phidot,
                -(2.0 * cv / r) * sdot + 2.0 * cv * phidot,
                (cv * w * w / (2.0 * r * r)) * chidot;

    Eigen::Vector3d torque;
    torque << (u(0) + u(1)) / r,
              -(u(0) + u(1)),
              (w / (2.0 * r)) * (u(1) - u(0));

    const Eigen::LLT<Eigen::Matrix3d> llt(M);
    if (llt.info() != Eigen::Success) {
      throw ModelError("robot: singular mass matrix");
    }
    const Eigen::Vector3d qddot = llt.solve(torque - coriolis - friction - gravity);

    Vector dx(6);
    dx(0) = qddot(0);
    dx(1) = qddot(1);
    dx(2) = qddot(2);
    dx(3) = sdot;
    dx(4) = phidot;
    dx(5) = chidot;
    return dx;
  };
  return sys;
}

namespace {

/// Central-difference Jacobians of f about (x0, u0).
std::pair<Matrix, Matrix> jacobians(const ContinuousSystem& sys, const Vector& x0,
                                    const Vector& u0) {
  const int n = sys.state_dim;
  const int p = sys.input_dim;
  Matrix F(n, n), G(n, p);
  for (int i = 0; i < n; ++i) {
    const double step = 1e-6 * (1.0 + std::abs(x0(i)));
    Vector hi = x0, lo = x0;
    hi(i) += step;
    lo(i) -= step;
    F.col(i) = (sys.f(hi, u0) - sys.f(lo, u0)) / (2.0 * step);
  }
  for (int i = 0; i < p; ++i) {
    const double step = 1e-6 * (1.0 + std::abs(u0(i)));
    Vector hi = u0, lo = u0;
    hi(i) += step;
    lo(i) -= step;
    G.col(i) = (sys.f(x0, hi) - sys.f(x0, lo)) / (2.0 * step);
  }
  return {F, G};
}

}  // namespace

LocalLinearization local_linearization(const ContinuousSystem& sys, const Vector& x_eq,
                                       const Vector& u_eq, double h) {
  const int n = sys.state_dim;
  const int p = sys.input_dim;
  LocalLinearization out;
  const Vector residual = sys.f(x_eq, u_eq);
  if (residual.cwiseAbs().maxCoeff() > 1e-8) {
    out.warning = "linearization point is not an equilibrium (|f| = " +
                  std::to_string(residual.cwiseAbs().maxCoeff()) +
                  "); affine residual dropped";
  }

  const auto [F, G] = jacobians(sys, x_eq, u_eq);

  // Exact zero-order-hold discretization through the augmented exponential.
  Matrix aug = Matrix::Zero(n + p, n + p);
  aug.topLeftCorner(n, n) = F;
  aug.topRightCorner(n, p) = G;
  const Matrix expm = (aug * h).exp();

  LiftedLinearPredictor& pred = out.predictor;
  pred.A = expm.topLeftCorner(n, n);
  pred.B = expm.topRightCorner(n, p);
  pred.C = Matrix::Identity(n, n);
  pred.h = h;
  std::vector<Observable> coords;
  for (int i = 0; i < n; ++i) {
    coords.push_back(Observable{Observable::Kind::Coordinate, i, 0.0, 1.0, 1});
  }
  pred.map = LiftingMap(n, std::move(coords));
  return out;
}

}  // namespace liftkit
