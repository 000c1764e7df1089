#pragma once

#include "liftkit/datagen.hpp"
#include "liftkit/predictor.hpp"

#include <json.hpp>

#include <utility>
#include <vector>

namespace liftkit {

/// Per-state affine scaling that maps each state's range on the evaluation
/// set into [-1, 1]. A zero-range state keeps scale 1 and is centered to 0.
struct StateScaling {
  Vector center;
  Vector halfrange;

  static StateScaling identity(int n);
  static StateScaling from_columns(const Matrix& state_columns);
  static StateScaling from_trajectories(const std::vector<Trajectory>& trajs);

  Vector weights() const { return halfrange.cwiseInverse(); }
  Vector apply(const Vector& x) const;
  Vector invert(const Vector& scaled) const;
  Matrix apply_columns(const Matrix& states) const;
};

/// Scaled copy of a set of state columns plus the scaling used.
std::pair<Matrix, StateScaling> scale_states(const Matrix& state_columns);
std::pair<std::vector<Trajectory>, StateScaling> scale_states(
    const std::vector<Trajectory>& trajs);

struct EvaluationOptions {
  bool scaled = true;            // weight errors by the evaluation-set ranges
  std::vector<int> state_mask;   // original-state indices to score; empty = all
  int horizon = 50;              // N_p for the prediction error
};

/// Mean one-step 2-norm error on the original states:
/// (1/N_d) sum_i || x_i+ - C (A Psi(x_i) + B u_i) ||.
double projected_error(const LiftedLinearPredictor& pred, const SnapshotDataset& ds,
                       const EvaluationOptions& opts = {});

/// Mean one-step 2-norm error on the full lifted state:
/// (1/N_d) sum_i || Psi(x_i+) - (A Psi(x_i) + B u_i) ||. This is the
/// quantity EDMD minimizes. When opts.scaled, each observable is weighted
/// by its evaluation-set range.
double lifted_error(const LiftedLinearPredictor& pred, const SnapshotDataset& ds,
                    const EvaluationOptions& opts = {});

/// Horizon-summed squared rollout error, averaged over trajectories:
/// (1/N_traj) sum_traj sum_{k=0}^{N_p-1} || x_{k+1} - xhat_{k+1} ||^2,
/// with the predictor lifted only at k = 0. Per-trajectory terms that
/// exceed 1e30 (diverging rollouts) are capped and flagged.
double prediction_error(const LiftedLinearPredictor& pred,
                        const std::vector<Trajectory>& eval_trajs, int horizon,
                        const EvaluationOptions& opts = {},
                        std::vector<double>* per_trajectory = nullptr,
                        bool* capped = nullptr);

struct EvaluationReport {
  double eps_projected = 0.0;
  double eps_lifted = 0.0;
  double eps_prediction = 0.0;
  int horizon = 0;
  bool scaled = true;
  bool prediction_capped = false;
  Vector scaling_center;
  Vector scaling_halfrange;
  std::vector<int> state_mask;
  std::vector<double> per_trajectory;

  nlohmann::json to_json() const;
  /// One CSV row: experiment id, dictionary, the three errors, N_p.
  std::string csv_row(const std::string& experiment_id, const std::string& dictionary) const;
  static std::string csv_header();
};

EvaluationReport evaluate(const LiftedLinearPredictor& pred, const SnapshotDataset& ds,
                          const std::vector<Trajectory>& eval_trajs,
                          const EvaluationOptions& opts = {});

}  // namespace liftkit
