#include "liftkit/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace liftkit {

Matrix pseudoinverse(const Matrix& m, double rank_tol, int* rank_out) {
  require_finite(m, "pseudoinverse: input");
  if (m.size() == 0) {
    if (rank_out) *rank_out = 0;
    return Matrix::Zero(m.cols(), m.rows());
  }
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = rank_tol * sv(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0.0) ++rank;
  }
  if (rank_out) *rank_out = rank;
  if (rank == 0) return Matrix::Zero(m.cols(), m.rows());
  const Matrix u = svd.matrixU().leftCols(rank);
  const Matrix v = svd.matrixV().leftCols(rank);
  const Vector inv = sv.head(rank).cwiseInverse();
  return v * inv.asDiagonal() * u.transpose();
}

namespace {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

void check_dare_inputs(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                       const Matrix& S) {
  const Eigen::Index n = A.rows();
  const Eigen::Index p = B.cols();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != p ||
      R.cols() != p || S.rows() != n || S.cols() != p) {
    throw std::invalid_argument("solve_dare: inconsistent dimensions");
  }
  require_finite(A, "solve_dare: A");
  require_finite(B, "solve_dare: B");
  require_finite(Q, "solve_dare: Q");
  require_finite(R, "solve_dare: R");
  require_finite(S, "solve_dare: S");
  if (Eigen::LLT<Matrix>(R).info() != Eigen::Success) {
    throw std::invalid_argument("solve_dare: R must be positive definite");
  }
}

}  // namespace

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                     const Matrix& S, const Matrix& P) {
  const Matrix S_eff = S.size() ? S : Matrix::Zero(A.rows(), B.cols());
  const Matrix PB = P * B;
  const Matrix G = symmetrized(R + B.transpose() * PB);
  const Matrix M = A.transpose() * PB + S_eff;                      // A'PB + S
  const Matrix N = B.transpose() * P * A + S_eff.transpose();       // B'PA + S'
  const Matrix res =
      A.transpose() * P * A - P - M * Eigen::LLT<Matrix>(G).solve(N) + Q;
  return res.norm();
}

DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                        const Matrix& S, double tol, int max_iter) {
  const Eigen::Index n = A.rows();
  const Eigen::Index p = B.cols();
  const Matrix S_eff = S.size() ? S : Matrix::Zero(n, p);
  check_dare_inputs(A, B, Q, R, S_eff);

  // Cross-term elimination.
  const Eigen::LLT<Matrix> r_llt(symmetrized(R));
  const Matrix rinv_st = r_llt.solve(S_eff.transpose());   // R^-1 S'
  const Matrix a_bar = A - B * rinv_st;
  const Matrix q_bar = symmetrized(Q - S_eff * rinv_st);

  Matrix P = q_bar;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < max_iter) {
    ++it;
    const Matrix PA = P * a_bar;                                    // P Abar
    const Matrix BtPA = B.transpose() * PA;                         // B' P Abar
    const Matrix G = symmetrized(R + B.transpose() * P * B);
    const Eigen::LLT<Matrix> g_llt(G);
    if (g_llt.info() != Eigen::Success) {
      throw NumericsError("solve_dare: R + B'PB lost positive definiteness", residual);
    }
    Matrix P_next =
        symmetrized(a_bar.transpose() * PA - BtPA.transpose() * g_llt.solve(BtPA) + q_bar);
    const double delta = (P_next - P).norm();
    P.swap(P_next);
    if (!P.allFinite() || P.norm() > 1e14) {
      throw NumericsError("solve_dare: iteration diverged (pair likely not stabilizable)",
                          delta);
    }
    if (delta <= tol * std::max(1.0, P.norm())) {
      residual = dare_residual(A, B, Q, R, S_eff, P);
      if (residual < tol) break;
    }
  }
  if (!(residual < tol)) {
    if (std::isinf(residual)) residual = dare_residual(A, B, Q, R, S_eff, P);
    if (!(residual < tol)) {
      throw NumericsError("solve_dare: no convergence within max_iter", residual);
    }
  }

  const Matrix G = symmetrized(R + B.transpose() * P * B);
  const Matrix K =
      Eigen::LLT<Matrix>(G).solve(B.transpose() * P * A + S_eff.transpose());
  const Matrix closed = A - B * K;
  const double radius = closed.eigenvalues().cwiseAbs().maxCoeff();
  if (radius >= 1.0) {
    throw NumericsError("solve_dare: converged to a non-stabilizing solution", radius);
  }
  return DareSolution{P, K, it, residual, radius};
}

void QpProblem::validate() const {
  const Eigen::Index n = H.rows();
  if (H.cols() != n || g.size() != n || lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("QpProblem: inconsistent dimensions");
  }
  require_finite(H, "QpProblem: H");
  require_finite(g, "QpProblem: g");
  const double scale = std::max(1.0, H.size() ? H.cwiseAbs().maxCoeff() : 0.0);
  if (n > 0 && (H - H.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("QpProblem: H must be symmetric");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(lower(i)) || std::isnan(upper(i)) || lower(i) > upper(i)) {
      throw std::invalid_argument("QpProblem: inconsistent bounds");
    }
  }
}

namespace {

Vector clamp_to_box(const Vector& x, const Vector& lo, const Vector& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

double kkt_residual_inf(const Matrix& H, const Vector& g, const Vector& lo, const Vector& hi,
                        const Vector& x) {
  const Vector grad = H * x + g;
  return (x - clamp_to_box(x - grad, lo, hi)).cwiseAbs().maxCoeff();
}

}  // namespace

QpSolution solve_qp(const QpProblem& p, double tol, int max_iter, const Vector* warm_start) {
  p.validate();
  const Eigen::Index n = p.H.rows();
  if (n == 0) return QpSolution{Vector(), 0, 0.0};

  // Jacobi equilibration: unit diagonal in the scaled metric. Box bounds
  // stay boxes under a diagonal change of variables.
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i) = p.H(i, i) > 1e-12 ? 1.0 / std::sqrt(p.H(i, i)) : 1.0;
  }
  const Matrix Hs = d.asDiagonal() * p.H * d.asDiagonal();
  const Vector gs = d.asDiagonal() * p.g;
  const Vector los = p.lower.cwiseQuotient(d);
  const Vector his = p.upper.cwiseQuotient(d);

  Eigen::SelfAdjointEigenSolver<Matrix> es(Hs, Eigen::EigenvaluesOnly);
  const double lmax = std::max(es.eigenvalues().maxCoeff(), 1e-12);
  const double lmin = std::max(es.eigenvalues().minCoeff(), 1e-6 * lmax);
  double rho = std::sqrt(lmin * lmax);
  rho = std::clamp(rho, 1e-6, 1e6);

  const Eigen::LLT<Matrix> llt(Hs + rho * Matrix::Identity(n, n));

  Vector z = warm_start ? clamp_to_box(warm_start->cwiseQuotient(d), los, his)
                        : clamp_to_box(Vector::Zero(n), los, his);
  Vector w = Vector::Zero(n);
  const double alpha = 1.6;

  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < max_iter) {
    ++it;
    const Vector x = llt.solve(rho * (z - w) - gs);
    const Vector x_rel = alpha * x + (1.0 - alpha) * z;
    z = clamp_to_box(x_rel + w, los, his);
    w += x_rel - z;

    const Vector cand = d.asDiagonal() * z;   // feasible by construction
    residual = kkt_residual_inf(p.H, p.g, p.lower, p.upper, cand);
    if (residual < tol) {
      return QpSolution{cand, it, residual};
    }
  }
  throw NumericsError("solve_qp: no convergence within max_iter", residual);
}

}  // namespace liftkit
