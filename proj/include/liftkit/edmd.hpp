#pragma once

#include "liftkit/datagen.hpp"
#include "liftkit/predictor.hpp"

#include <vector>

namespace liftkit {

struct FitOptions {
  double rank_tol = 1e-12;
  double ridge = 0.0;   // optional Tikhonov term on the normal equations
};

struct FitReport {
  int regressor_rows = 0;
  int rank = 0;
  bool rank_deficient = false;
  double residual_fro = 0.0;   // || Y_lift - A X_lift - B U ||_F
};

struct FitResult {
  LiftedLinearPredictor predictor;
  FitReport report;
};

/// EDMD least squares. [A B] solves min || Y_lift - A X_lift - B U ||_F
/// through the pseudoinverse of the regressor Gram matrix; C is the exact
/// coordinate selector when the map contains every coordinate observable
/// and otherwise solves min || X - C X_lift ||_F.
FitResult fit(const SnapshotDataset& ds, const FitOptions& options = {});

struct BilinearFitResult {
  BilinearPredictor predictor;
  FitReport report;
};

/// Least squares over the extended regressor [z; z (x) u] per snapshot.
BilinearFitResult fit_bilinear(const SnapshotDataset& ds, const FitOptions& options = {});

/// Magnitude report on the fitted A for states that must not influence the
/// dynamics. The score is the largest |A| entry in a column of an invariant
/// state's coordinate observable, excluding that state's own row.
struct CouplingReport {
  Matrix abs_A;                        // full |A| grid for heatmap rendering
  std::vector<std::string> labels;     // observable labels for the grid axes
  std::vector<int> checked_columns;    // lifted columns that were scored
  double score = 0.0;
};

/// invariant_state_indices are original-state indices; states absent from
/// the map contribute no columns (vacuous score 0).
CouplingReport coupling_report(const LiftedLinearPredictor& pred,
                               const std::vector<int>& invariant_state_indices);

}  // namespace liftkit
