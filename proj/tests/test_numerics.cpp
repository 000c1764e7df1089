#include "liftkit/numerics.hpp"
#include "liftkit/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace liftkit;

namespace {

Matrix random_matrix(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  }
  return m;
}

/// Random A rescaled to the requested spectral radius; with a random B the
/// pair is controllable almost surely.
std::pair<Matrix, Matrix> random_stabilizable_pair(Rng& rng, int n, int p, double radius) {
  Matrix a = random_matrix(rng, n, n);
  const double rho = a.eigenvalues().cwiseAbs().maxCoeff();
  a *= radius / rho;
  return {a, random_matrix(rng, n, p)};
}

}  // namespace

TEST_CASE("pseudoinverse: identity is its own pseudoinverse") {
  const Matrix m = Matrix::Identity(3, 3);
  CHECK((pseudoinverse(m) - m).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pseudoinverse: rank-deficient diagonal is self-pseudoinverse") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  int rank = -1;
  const Matrix mp = pseudoinverse(m, 1e-12, &rank);
  CHECK(rank == 1);
  CHECK((mp - m).norm() < 1e-14);
}

TEST_CASE("pseudoinverse: row vector, hand-computed A' (A A')^-1") {
  Matrix m(1, 2);
  m << 1.0, 2.0;
  const Matrix mp = pseudoinverse(m);
  CHECK(mp(0, 0) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(mp(1, 0) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("pseudoinverse: rejects non-finite input") {
  Matrix m(1, 1);
  m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(pseudoinverse(m), std::invalid_argument);
}

TEST_CASE("pseudoinverse: Moore-Penrose identities on random matrices") {
  Rng rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    const int rows = 1 + static_cast<int>(rng.below(8));
    const int cols = 1 + static_cast<int>(rng.below(8));
    Matrix m = random_matrix(rng, rows, cols);
    if (trial % 3 == 0 && rows > 1) m.row(rows - 1) = m.row(0);   // force rank deficiency
    const Matrix mp = pseudoinverse(m);
    CHECK((m * mp * m - m).norm() <= 1e-8 * std::max(1.0, m.norm()));
    CHECK((mp * m * mp - mp).norm() <= 1e-8 * std::max(1.0, mp.norm()));
    CHECK((m * mp - (m * mp).transpose()).norm() < 1e-8);
    CHECK((mp * m - (mp * m).transpose()).norm() < 1e-8);
  }
}

TEST_CASE("solve_dare: scalar golden-ratio fixed point") {
  const Matrix one = Matrix::Ones(1, 1);
  const DareSolution sol = solve_dare(one, one, one, one);
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(sol.P(0, 0) == doctest::Approx(golden).epsilon(1e-9));
  CHECK(sol.K(0, 0) == doctest::Approx(golden - 1.0).epsilon(1e-9));
  CHECK(sol.residual < 1e-10);
}

TEST_CASE("solve_dare: dead-beat scalar system") {
  const Matrix one = Matrix::Ones(1, 1);
  const DareSolution sol = solve_dare(Matrix::Zero(1, 1), one, one, one);
  CHECK(sol.P(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(sol.K(0, 0)) < 1e-10);
}

TEST_CASE("solve_dare: random stabilizable 4x4, residual is its own oracle") {
  Rng rng(202);
  const auto [a, b] = random_stabilizable_pair(rng, 4, 2, 1.1);
  const Matrix q = Matrix::Identity(4, 4);
  const Matrix r = Matrix::Identity(2, 2);
  const DareSolution sol = solve_dare(a, b, q, r);
  CHECK(dare_residual(a, b, q, r, Matrix::Zero(4, 2), sol.P) < 1e-10);
  CHECK(sol.closed_loop_radius < 1.0);
}

TEST_CASE("solve_dare: cross term matches the substituted problem") {
  Rng rng(303);
  const auto [a, b] = random_stabilizable_pair(rng, 3, 1, 0.95);
  const Matrix q = 2.0 * Matrix::Identity(3, 3);
  const Matrix r = Matrix::Ones(1, 1);
  Matrix s(3, 1);
  s << 0.1, -0.05, 0.2;
  const DareSolution sol = solve_dare(a, b, q, r, s);
  CHECK(dare_residual(a, b, q, r, s, sol.P) < 1e-10);
  CHECK((sol.P - sol.P.transpose()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("solve_dare: stability and symmetry over 100 random instances") {
  Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(4));
    const int p = 1 + static_cast<int>(rng.below(2));
    const auto [a, b] = random_stabilizable_pair(rng, n, p, rng.uniform(0.5, 1.3));
    const Matrix q = Matrix::Identity(n, n);
    const Matrix r = Matrix::Identity(p, p);
    const DareSolution sol = solve_dare(a, b, q, r);
    CHECK(sol.closed_loop_radius < 1.0);
    CHECK((sol.P - sol.P.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(sol.P, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-9);
  }
}

TEST_CASE("solve_dare: unstabilizable pair raises a non-convergence error") {
  Matrix a(2, 2);
  a << 2.0, 0.0, 0.0, 0.5;      // unstable mode untouched by B
  Matrix b(2, 1);
  b << 0.0, 1.0;
  CHECK_THROWS_AS(solve_dare(a, b, Matrix::Identity(2, 2), Matrix::Ones(1, 1)),
                  NumericsError);
}

TEST_CASE("solve_qp: interior unconstrained minimum") {
  QpProblem p;
  p.H = Matrix::Identity(2, 2);
  p.g = Vector::Zero(2);
  p.lower = Vector::Constant(2, -1.0);
  p.upper = Vector::Constant(2, 1.0);
  const QpSolution sol = solve_qp(p);
  CHECK(sol.x.norm() < 1e-7);
}

TEST_CASE("solve_qp: scalar clipped to the active bound, grid-search oracle") {
  QpProblem p;
  p.H = Matrix::Ones(1, 1);
  p.g = Vector::Constant(1, -4.0);
  p.lower = Vector::Constant(1, -1.0);
  p.upper = Vector::Constant(1, 1.0);
  const QpSolution sol = solve_qp(p);

  double best_x = 0.0, best_obj = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2000; ++i) {
    const double x = -1.0 + 2.0 * i / 2000.0;
    const double obj = 0.5 * x * x - 4.0 * x;
    if (obj < best_obj) {
      best_obj = obj;
      best_x = x;
    }
  }
  CHECK(best_x == doctest::Approx(1.0));
  CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("solve_qp: separable problem, per-coordinate closed form") {
  QpProblem p;
  p.H = Matrix::Identity(2, 2);
  p.g = Vector::Constant(2, -1.0);
  p.lower = Vector::Zero(2);
  p.upper = Vector::Constant(2, 2.0);
  const QpSolution sol = solve_qp(p);
  CHECK((sol.x - Vector::Ones(2)).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("solve_qp: dominates 1000 random feasible points") {
  Rng rng(505);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(19));
    const Matrix g_mat = random_matrix(rng, n, n);
    QpProblem p;
    p.H = g_mat * g_mat.transpose();
    p.g = random_matrix(rng, n, 1).col(0);
    p.lower.resize(n);
    p.upper.resize(n);
    for (int i = 0; i < n; ++i) {
      p.lower(i) = rng.uniform(-2.0, 0.0);
      p.upper(i) = p.lower(i) + rng.uniform(0.1, 3.0);
    }
    const QpSolution sol = solve_qp(p, 1e-9);
    const auto objective = [&](const Vector& x) {
      return 0.5 * (x.transpose() * p.H * x).value() + p.g.dot(x);
    };
    const double obj_star = objective(sol.x);
    CHECK((sol.x.array() >= p.lower.array() - 1e-12).all());
    CHECK((sol.x.array() <= p.upper.array() + 1e-12).all());
    for (int k = 0; k < 1000; ++k) {
      Vector x(n);
      for (int i = 0; i < n; ++i) x(i) = rng.uniform(p.lower(i), p.upper(i));
      CHECK(obj_star <= objective(x) + 1e-7);
    }
  }
}

TEST_CASE("solve_qp: rejects asymmetric H and crossed bounds") {
  QpProblem p;
  p.H = Matrix::Zero(2, 2);
  p.H(0, 1) = 1.0;
  p.g = Vector::Zero(2);
  p.lower = Vector::Zero(2);
  p.upper = Vector::Ones(2);
  CHECK_THROWS_AS(solve_qp(p), std::invalid_argument);

  p.H = Matrix::Identity(2, 2);
  p.lower(0) = 2.0;
  CHECK_THROWS_AS(solve_qp(p), std::invalid_argument);
}
