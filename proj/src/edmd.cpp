#include "liftkit/edmd.hpp"

#include "liftkit/numerics.hpp"

namespace liftkit {

namespace {

/// Minimum-norm solution of min || Y - M W ||_F over M, solved as
/// M = Y W' (W W')^+ per the EDMD normal equations.
Matrix gram_least_squares(const Matrix& Y, const Matrix& W, const FitOptions& options,
                          int* rank_out) {
  Matrix gram = W * W.transpose();
  if (options.ridge > 0.0) {
    gram += options.ridge * Matrix::Identity(gram.rows(), gram.cols());
  }
  const Matrix cross = Y * W.transpose();
  return cross * pseudoinverse(gram, options.rank_tol, rank_out);
}

}  // namespace

FitResult fit(const SnapshotDataset& ds, const FitOptions& options) {
  if (ds.size() < 1) throw std::invalid_argument("fit: empty dataset");
  const Eigen::Index N = ds.X_lift.rows();
  const Eigen::Index p = ds.U.rows();

  Matrix W(N + p, ds.size());
  W.topRows(N) = ds.X_lift;
  W.bottomRows(p) = ds.U;

  FitResult out;
  int rank = 0;
  const Matrix AB = gram_least_squares(ds.Y_lift, W, options, &rank);
  out.predictor.A = AB.leftCols(N);
  out.predictor.B = AB.rightCols(p);
  out.predictor.map = ds.map;
  out.predictor.h = ds.h;

  if (ds.map.has_all_coordinates()) {
    out.predictor.C = ds.map.selector();
  } else {
    out.predictor.C = gram_least_squares(ds.X, ds.X_lift, options, nullptr);
  }

  out.report.regressor_rows = static_cast<int>(N + p);
  out.report.rank = rank;
  out.report.rank_deficient = rank < N + p;
  out.report.residual_fro =
      (ds.Y_lift - out.predictor.A * ds.X_lift - out.predictor.B * ds.U).norm();
  return out;
}

BilinearFitResult fit_bilinear(const SnapshotDataset& ds, const FitOptions& options) {
  if (ds.size() < 1) throw std::invalid_argument("fit_bilinear: empty dataset");
  const Eigen::Index N = ds.X_lift.rows();
  const Eigen::Index p = ds.U.rows();
  const Eigen::Index rows = N + N * p;

  Matrix W(rows, ds.size());
  W.topRows(N) = ds.X_lift;
  for (Eigen::Index j = 0; j < p; ++j) {
    W.middleRows(N + j * N, N) = ds.X_lift * ds.U.row(j).asDiagonal();
  }

  BilinearFitResult out;
  int rank = 0;
  const Matrix coeffs = gram_least_squares(ds.Y_lift, W, options, &rank);
  out.predictor.A = coeffs.leftCols(N);
  out.predictor.B.reserve(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    out.predictor.B.push_back(coeffs.middleCols(N + j * N, N));
  }
  out.predictor.map = ds.map;
  out.predictor.h = ds.h;
  out.predictor.C =
      ds.map.has_all_coordinates()
          ? ds.map.selector()
          : gram_least_squares(ds.X, ds.X_lift, options, nullptr);

  out.report.regressor_rows = static_cast<int>(rows);
  out.report.rank = rank;
  out.report.rank_deficient = rank < rows;
  out.report.residual_fro = (ds.Y_lift - coeffs * W).norm();
  return out;
}

CouplingReport coupling_report(const LiftedLinearPredictor& pred,
                               const std::vector<int>& invariant_state_indices) {
  CouplingReport rep;
  rep.abs_A = pred.A.cwiseAbs();
  rep.labels = pred.map.labels();
  for (int state : invariant_state_indices) {
    const int col = pred.map.coordinate_row(state);   // throws if out of range
    if (col >= 0) rep.checked_columns.push_back(col);
  }
  for (int col : rep.checked_columns) {
    for (Eigen::Index row = 0; row < rep.abs_A.rows(); ++row) {
      if (row == col) continue;   // the state's own integrator row is physical
      rep.score = std::max(rep.score, rep.abs_A(row, col));
    }
  }
  return rep;
}

}  // namespace liftkit
