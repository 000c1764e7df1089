#pragma once

#include "liftkit/types.hpp"

namespace liftkit {

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// rank_tol * sigma_max are truncated; the numerical rank is reported
/// through rank_out when given.
Matrix pseudoinverse(const Matrix& m, double rank_tol = 1e-12, int* rank_out = nullptr);

struct DareSolution {
  Matrix P;                   // stabilizing solution, symmetric PSD
  Matrix K;                   // feedback gain, u = -K x
  int iterations = 0;
  double residual = 0.0;      // Frobenius norm of the DARE residual at P
  double closed_loop_radius = 0.0;
};

/// Residual of the discrete-time algebraic Riccati equation with cross
/// term S at a candidate P:
///   A'PA - P - (A'PB + S)(R + B'PB)^-1 (B'PA + S') + Q
double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                     const Matrix& S, const Matrix& P);

/// Solves the DARE by fixed-point iteration on the Riccati map. The cross
/// term is eliminated up front by the substitution Abar = A - B R^-1 S',
/// Qbar = Q - S R^-1 S'. Throws NumericsError if the iteration diverges or
/// the residual does not reach tol within max_iter.
DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                        const Matrix& S = Matrix(), double tol = 1e-10, int max_iter = 100000);

/// Box-constrained convex QP:  min 1/2 x'Hx + g'x  s.t. lower <= x <= upper.
struct QpProblem {
  Matrix H;
  Vector g;
  Vector lower;
  Vector upper;

  void validate() const;
};

struct QpSolution {
  Vector x;
  int iterations = 0;
  double kkt_residual = 0.0;
};

/// Operator-splitting (ADMM) iteration with Jacobi equilibration. The
/// returned point is exactly feasible; termination is on the
/// projected-gradient KKT residual of the original problem.
QpSolution solve_qp(const QpProblem& p, double tol = 1e-8, int max_iter = 200000,
                    const Vector* warm_start = nullptr);

}  // namespace liftkit
