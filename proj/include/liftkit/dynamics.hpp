#pragma once

#include "liftkit/predictor.hpp"
#include "liftkit/trajectory.hpp"
#include "liftkit/types.hpp"

#include <functional>
#include <string>

namespace liftkit {

/// Continuous-time control system xdot = f(x, u).
struct ContinuousSystem {
  int state_dim = 0;
  int input_dim = 0;
  std::string name;
  std::function<Vector(const Vector&, const Vector&)> f;
};

/// Classical 4th-order Runge-Kutta update with zero-order-hold input.
Vector rk4_step(const ContinuousSystem& sys, const Vector& x, const Vector& u, double h);

/// Rollout under a given input sequence (one column per step).
Trajectory simulate(const ContinuousSystem& sys, const Vector& x0, const Matrix& inputs,
                    double h);

/// Torque-driven damped pendulum with the origin at the upward equilibrium:
///   phidot = omega
///   omegadot = (g/l) sin(phi) - gamma/(m l^2) omega + u/(m l^2)
struct PendulumParams {
  double m = 1.0;       // kg
  double l = 1.0;       // m
  double gamma = 0.1;   // N m s / rad
  double g = 9.81;      // m / s^2
};

ContinuousSystem pendulum(const PendulumParams& params);

/// Two-wheeled balancing robot with generalized coordinates
/// q = [s, phi, chi] (travel, tilt, yaw) and state x = [qdot, q].
/// Dynamics M(q) qddot = Bin u - C(q, qdot) qdot - D qdot - G(q); both u1
/// and u2 are wheel torques. Inertia defaults come from a cuboid body and
/// solid-disc wheels.
struct RobotParams {
  double wheel_radius = 0.05;            // m
  double wheel_mass = 0.2;               // kg, each
  double body_mass = 1.2;                // kg
  double com_height = 0.15;              // m, axle to body COM
  double track_width = 0.2;              // m
  double pitch_inertia = 0.01;           // kg m^2, body about the axle axis
  double yaw_inertia = 0.005;            // kg m^2, body about vertical
  double roll_inertia = 0.013;           // kg m^2, body about forward axis
  double wheel_spin_inertia = 0.00025;   // kg m^2, each wheel about its axle
  double wheel_yaw_inertia = 0.000125;   // kg m^2, each wheel about vertical
  double viscous_friction = 0.01;        // N m s, per wheel axle
  double g = 9.81;
};

ContinuousSystem robot(const RobotParams& params);

struct LocalLinearization {
  LiftedLinearPredictor predictor;
  std::string warning;   // non-empty when (x_eq, u_eq) is not an equilibrium
};

/// Central-difference Jacobians at (x_eq, u_eq), discretized exactly by
/// zero-order hold, returned as a predictor with identity lifting (C = I).
LocalLinearization local_linearization(const ContinuousSystem& sys, const Vector& x_eq,
                                       const Vector& u_eq, double h);

}  // namespace liftkit
