#pragma once

#include "liftkit/lifting.hpp"
#include "liftkit/trajectory.hpp"
#include "liftkit/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <vector>

namespace liftkit {

/// Lifted linear predictor z+ = Az + Bu, xhat = Cz with z0 = Psi(x0).
struct LiftedLinearPredictor {
  Matrix A;   // N x N
  Matrix B;   // N x p
  Matrix C;   // n x N
  LiftingMap map;
  double h = 0.01;

  int lifted_dim() const { return static_cast<int>(A.rows()); }
  int state_dim() const { return static_cast<int>(C.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }

  void validate() const;

  nlohmann::json to_json() const;
  static LiftedLinearPredictor from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static LiftedLinearPredictor load(const std::filesystem::path& path);
};

/// Bilinear predictor z+ = Az + (Bz)u: one N x N input-coupling slice per
/// input channel.
struct BilinearPredictor {
  Matrix A;
  std::vector<Matrix> B;   // p slices, each N x N
  Matrix C;
  LiftingMap map;
  double h = 0.01;

  int lifted_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.size()); }
};

/// Rolls the predictor forward: lift once at k = 0, iterate the linear
/// dynamics, project every step through C.
Trajectory predict_llp(const LiftedLinearPredictor& pred, const Vector& x0,
                       const Matrix& inputs);

Trajectory predict_bilinear(const BilinearPredictor& pred, const Vector& x0,
                            const Matrix& inputs);

/// Project-and-lift rollout of an LLP: ztilde = Psi(C z) replaces z before
/// each linear step, with the plain input term B u.
Trajectory predict_project_and_lift(const LiftedLinearPredictor& pred, const Vector& x0,
                                    const Matrix& inputs);

/// Project-and-lift rollout of the bilinear predictor:
/// z+ = A Psi(C z) + (B z) u.
Trajectory predict_project_and_lift(const BilinearPredictor& pred, const Vector& x0,
                                    const Matrix& inputs);

}  // namespace liftkit
