#include "liftkit/edmd.hpp"
#include "liftkit/io.hpp"
#include "liftkit/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace liftkit;

namespace {

Matrix random_matrix(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  }
  return m;
}

LiftingMap coordinates_map(int n) {
  std::vector<Observable> obs;
  for (int i = 0; i < n; ++i) {
    obs.push_back(Observable{Observable::Kind::Coordinate, i, 0.0, 1.0, 1});
  }
  return LiftingMap(n, std::move(obs));
}

/// Snapshots generated exactly by a known discrete linear system, identity
/// lifting. The generating matrices are the oracle.
SnapshotDataset linear_system_dataset(const Matrix& A0, const Matrix& B0, int count,
                                      std::uint64_t seed) {
  const int n = static_cast<int>(A0.rows());
  const int p = static_cast<int>(B0.cols());
  Rng rng(seed);
  SnapshotDataset ds;
  ds.map = coordinates_map(n);
  ds.X = random_matrix(rng, n, count);
  ds.U = random_matrix(rng, p, count);
  ds.X_lift = ds.X;
  ds.Y_lift = A0 * ds.X + B0 * ds.U;
  ds.h = 0.01;
  return ds;
}

LiftingMap sine_map() {
  DictionarySpec s;
  s.kind = "sine";
  s.state_dim = 2;
  s.angle_index = 0;
  return make_dictionary(s, 0);
}

SnapshotDataset pendulum_dataset(int count, std::uint64_t seed) {
  const ContinuousSystem sys = pendulum(PendulumParams{});
  ExcitationSpec spec;
  spec.count = count;
  spec.length_s = 0.5;
  spec.seed = seed;
  return assemble(collect(sys, spec), sine_map());
}

}  // namespace

TEST_CASE("fit: exact recovery of a linear system under identity lifting") {
  Rng rng(808);
  Matrix a0 = random_matrix(rng, 3, 3);
  a0 *= 0.9 / a0.eigenvalues().cwiseAbs().maxCoeff();
  const Matrix b0 = random_matrix(rng, 3, 2);
  const SnapshotDataset ds = linear_system_dataset(a0, b0, 60, 5);
  const FitResult res = fit(ds);
  CHECK((res.predictor.A - a0).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((res.predictor.B - b0).cwiseAbs().maxCoeff() < 1e-8);
  CHECK_FALSE(res.report.rank_deficient);
  CHECK(res.report.residual_fro < 1e-10);
}

TEST_CASE("fit: scalar minimum-norm solution on rank-deficient data") {
  SnapshotDataset ds;
  ds.map = coordinates_map(1);
  ds.X = Matrix::Ones(1, 1);
  ds.X_lift = ds.X;
  ds.U = Matrix::Zero(1, 1);
  ds.Y_lift = 2.0 * Matrix::Ones(1, 1);
  const FitResult res = fit(ds);
  CHECK(res.predictor.A(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(res.predictor.B(0, 0)) < 1e-12);
  CHECK(res.report.rank_deficient);
  CHECK(res.report.rank == 1);
}

TEST_CASE("fit: residual is optimal against random perturbations") {
  const SnapshotDataset ds = pendulum_dataset(40, 99);
  const FitResult res = fit(ds);
  const double base =
      (ds.Y_lift - res.predictor.A * ds.X_lift - res.predictor.B * ds.U).norm();
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    Matrix da(3, 3), db(3, 1);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) da(r, c) = rng.normal();
      db(r, 0) = rng.normal();
    }
    da *= 1e-3 / da.norm();
    db *= 1e-3 / db.norm();
    const double perturbed = (ds.Y_lift - (res.predictor.A + da) * ds.X_lift -
                              (res.predictor.B + db) * ds.U)
                                 .norm();
    CHECK(perturbed > base);
  }
}

TEST_CASE("fit: selector C when the map has every coordinate") {
  const SnapshotDataset ds = pendulum_dataset(5, 3);
  const FitResult res = fit(ds);
  Matrix expected = Matrix::Zero(2, 3);
  expected(0, 0) = 1.0;
  expected(1, 1) = 1.0;
  CHECK(res.predictor.C == expected);
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(2);
    x << rng.uniform(-3.0, 3.0), rng.uniform(-5.0, 5.0);
    CHECK(res.predictor.C * ds.map.lift(x) == x);
  }
}

TEST_CASE("fit: least-squares C when coordinates are missing") {
  // Map with only the first coordinate; C must reconstruct both states.
  std::vector<Observable> obs;
  obs.push_back(Observable{Observable::Kind::Coordinate, 0, 0.0, 1.0, 1});
  obs.push_back(Observable{Observable::Kind::SineOfCoordinate, 1, 0.0, 1.0, 1});
  const LiftingMap map(2, std::move(obs));
  const ContinuousSystem sys = pendulum(PendulumParams{});
  ExcitationSpec spec;
  spec.count = 20;
  spec.seed = 55;
  const SnapshotDataset ds = assemble(collect(sys, spec), map);
  const FitResult res = fit(ds);
  // Row for state 0 can be exact; row for state 1 is a least-squares fit.
  CHECK(res.predictor.C(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  const double residual = (ds.X - res.predictor.C * ds.X_lift).norm();
  const double trivial = ds.X.norm();
  CHECK(residual < trivial);
}

TEST_CASE("predict_llp: zero-dynamics predictor holds the state") {
  LiftedLinearPredictor pred;
  pred.map = sine_map();
  pred.A = Matrix::Identity(3, 3);
  pred.B = Matrix::Zero(3, 1);
  pred.C = pred.map.selector();
  pred.h = 0.01;
  Vector x0(2);
  x0 << 0.4, -0.7;
  const Trajectory t = predict_llp(pred, x0, Matrix::Zero(1, 20));
  for (int k = 0; k <= 20; ++k) {
    CHECK((t.states.col(k) - x0).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("predict_llp: a linear system is its own predictor") {
  const ContinuousSystem sys = [] {
    ContinuousSystem s;
    s.state_dim = 2;
    s.input_dim = 1;
    s.name = "linear";
    s.f = [](const Vector& x, const Vector& u) -> Vector {
      Matrix f(2, 2);
      f << -0.2, 1.0, -1.0, -0.3;
      Matrix g(2, 1);
      g << 0.0, 1.0;
      return f * x + g * u;
    };
    return s;
  }();
  const LiftedLinearPredictor pred =
      local_linearization(sys, Vector::Zero(2), Vector::Zero(1), 0.01).predictor;
  Rng rng(66);
  Matrix inputs(1, 100);
  for (int k = 0; k < 100; ++k) inputs(0, k) = rng.uniform(-1.0, 1.0);
  Vector x0(2);
  x0 << 0.5, -0.25;
  const Trajectory truth = simulate(sys, x0, inputs, 0.01);
  const Trajectory hat = predict_llp(pred, x0, inputs);
  CHECK((truth.states - hat.states).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("predict_llp: exact-recovery predictor tracks the generating rollout") {
  Rng rng(909);
  Matrix a0 = random_matrix(rng, 4, 4);
  a0 *= 0.85 / a0.eigenvalues().cwiseAbs().maxCoeff();
  const Matrix b0 = random_matrix(rng, 4, 2);
  const SnapshotDataset ds = linear_system_dataset(a0, b0, 120, 6);
  const LiftedLinearPredictor pred = fit(ds).predictor;

  Vector x = random_matrix(rng, 4, 1).col(0);
  Matrix inputs = random_matrix(rng, 2, 50);
  const Trajectory hat = predict_llp(pred, x, inputs);
  for (int k = 0; k < 50; ++k) {
    x = a0 * x + b0 * inputs.col(k);
    CHECK((hat.states.col(k + 1) - x).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("predict_bilinear: zero input reduces to the linear part") {
  BilinearPredictor pred;
  pred.map = sine_map();
  Rng rng(5);
  pred.A = random_matrix(rng, 3, 3, -0.4, 0.4);
  pred.B = {random_matrix(rng, 3, 3)};
  pred.C = pred.map.selector();
  pred.h = 0.01;

  LiftedLinearPredictor lin;
  lin.map = pred.map;
  lin.A = pred.A;
  lin.B = Matrix::Zero(3, 1);
  lin.C = pred.C;
  lin.h = 0.01;

  Vector x0(2);
  x0 << 1.0, -0.5;
  const Matrix u = Matrix::Zero(1, 30);
  CHECK((predict_bilinear(pred, x0, u).states - predict_llp(lin, x0, u).states)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("predict_bilinear: scalar hand example z1 = 2") {
  BilinearPredictor pred;
  pred.map = coordinates_map(1);
  pred.A = Matrix::Ones(1, 1);
  pred.B = {Matrix::Ones(1, 1)};
  pred.C = Matrix::Ones(1, 1);
  pred.h = 0.01;
  const Trajectory t = predict_bilinear(pred, Vector::Ones(1), Matrix::Ones(1, 1));
  CHECK(t.states(0, 1) == 2.0);   // 1*1 + (1*1)*1
}

TEST_CASE("fit_bilinear: exact recovery of a bilinear scalar system") {
  SnapshotDataset ds;
  ds.map = coordinates_map(1);
  Rng rng(23);
  const double a0 = 0.8, b0 = 0.3;
  ds.X = random_matrix(rng, 1, 40);
  ds.U = random_matrix(rng, 1, 40);
  ds.X_lift = ds.X;
  ds.Y_lift.resize(1, 40);
  for (int j = 0; j < 40; ++j) {
    ds.Y_lift(0, j) = a0 * ds.X(0, j) + b0 * ds.X(0, j) * ds.U(0, j);
  }
  ds.h = 0.01;
  const BilinearFitResult res = fit_bilinear(ds);
  CHECK(res.predictor.A(0, 0) == doctest::Approx(a0).epsilon(1e-8));
  CHECK(res.predictor.B[0](0, 0) == doctest::Approx(b0).epsilon(1e-8));
}

TEST_CASE("fit_bilinear: zero-input dataset pins A, leaves B at minimum norm") {
  const ContinuousSystem sys = pendulum(PendulumParams{});
  ExcitationSpec spec;
  spec.count = 30;
  spec.seed = 77;
  spec.mode = ExcitationMode::OpenLoopRandom;
  spec.init_scheme = InitScheme::UniformAngle;
  spec.perturb_amplitude = 0.0;   // u identically zero
  const SnapshotDataset ds = assemble(collect(sys, spec), sine_map());
  const FitResult lin = fit(ds);
  const BilinearFitResult bil = fit_bilinear(ds);
  CHECK((bil.predictor.A - lin.predictor.A).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(bil.predictor.B[0].cwiseAbs().maxCoeff() < 1e-9);
  CHECK(bil.report.rank_deficient);
}

TEST_CASE("fit_bilinear: regressor has N + N*p rows") {
  Rng rng(3);
  SnapshotDataset ds;
  ds.map = coordinates_map(5);
  ds.X = random_matrix(rng, 5, 30);
  ds.X_lift = ds.X;
  ds.U = random_matrix(rng, 2, 30);
  ds.Y_lift = random_matrix(rng, 5, 30);
  ds.h = 0.01;
  const BilinearFitResult res = fit_bilinear(ds);
  CHECK(res.report.regressor_rows == 15);
  CHECK(res.predictor.B.size() == 2);
}

TEST_CASE("predict_project_and_lift: identity on coordinate-only maps") {
  LiftedLinearPredictor pred;
  pred.map = coordinates_map(2);
  Rng rng(8);
  pred.A = random_matrix(rng, 2, 2, -0.4, 0.4);
  pred.B = random_matrix(rng, 2, 1);
  pred.C = Matrix::Identity(2, 2);
  pred.h = 0.01;
  Vector x0(2);
  x0 << 0.2, -0.9;
  const Matrix inputs = random_matrix(rng, 1, 25);
  const Trajectory plain = predict_llp(pred, x0, inputs);
  const Trajectory pl = predict_project_and_lift(pred, x0, inputs);
  CHECK((plain.states - pl.states).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("predict_project_and_lift: first step matches lift-then-step") {
  const SnapshotDataset ds = pendulum_dataset(30, 21);
  const LiftedLinearPredictor pred = fit(ds).predictor;
  Vector x0(2);
  x0 << 2.5, 0.0;
  const Matrix u0 = Matrix::Zero(1, 1);
  const Trajectory one = predict_project_and_lift(pred, x0, u0);
  const Trajectory plain = predict_llp(pred, x0, u0);
  CHECK((one.states.col(1) - plain.states.col(1)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("predict_project_and_lift: diverges from the plain rollout on nonlinear maps") {
  const SnapshotDataset ds = pendulum_dataset(30, 22);
  const LiftedLinearPredictor pred = fit(ds).predictor;
  Vector x0(2);
  x0 << 2.5, 0.0;
  const Matrix inputs = Matrix::Zero(1, 50);
  const Trajectory plain = predict_llp(pred, x0, inputs);
  const Trajectory pl = predict_project_and_lift(pred, x0, inputs);
  CHECK((plain.states - pl.states).cwiseAbs().maxCoeff() > 1e-9);
}

TEST_CASE("predict_project_and_lift: bilinear form follows the printed recurrence") {
  BilinearPredictor pred;
  pred.map = sine_map();
  Rng rng(91);
  pred.A = random_matrix(rng, 3, 3, -0.3, 0.3);
  pred.B = {random_matrix(rng, 3, 3, -0.2, 0.2)};
  pred.C = pred.map.selector();
  pred.h = 0.01;
  Vector x0(2);
  x0 << 1.2, 0.3;
  Matrix inputs = random_matrix(rng, 1, 10);
  const Trajectory t = predict_project_and_lift(pred, x0, inputs);

  Vector z = pred.map.lift(x0);
  for (int k = 0; k < 10; ++k) {
    z = pred.A * pred.map.lift(pred.C * z) + inputs(0, k) * (pred.B[0] * z);
    CHECK((t.states.col(k + 1) - pred.C * z).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("coupling_report: vacuous when the states are absent from the map") {
  DictionarySpec s;
  s.kind = "sine";
  s.state_dim = 6;
  s.angle_index = 4;
  s.coordinate_subset = {0, 1, 2, 4};
  SnapshotDataset ds;
  ds.map = make_dictionary(s, 0);
  Rng rng(2);
  LiftedLinearPredictor pred;
  pred.map = ds.map;
  pred.A = random_matrix(rng, 5, 5);
  pred.B = random_matrix(rng, 5, 2);
  pred.C = random_matrix(rng, 6, 5);
  pred.h = 0.01;
  const CouplingReport rep = coupling_report(pred, {3, 5});
  CHECK(rep.score == 0.0);
  CHECK(rep.checked_columns.empty());
  CHECK_THROWS_AS(coupling_report(pred, {6}), std::out_of_range);
}

TEST_CASE("coupling_report: local robot predictor has no spurious coupling") {
  const ContinuousSystem sys = robot(RobotParams{});
  const LiftedLinearPredictor local =
      local_linearization(sys, Vector::Zero(6), Vector::Zero(2), 0.01).predictor;
  const CouplingReport rep = coupling_report(local, {3, 5});
  CHECK(rep.checked_columns.size() == 2);
  CHECK(rep.score < 1e-8);
}

TEST_CASE("predictor JSON round trip is bit-faithful") {
  const SnapshotDataset ds = pendulum_dataset(25, 44);
  const LiftedLinearPredictor pred = fit(ds).predictor;
  const auto path = std::filesystem::temp_directory_path() / "liftkit_pred.json";
  pred.save(path);
  const LiftedLinearPredictor back = LiftedLinearPredictor::load(path);
  CHECK(back.A == pred.A);
  CHECK(back.B == pred.B);
  CHECK(back.C == pred.C);
  CHECK(back.h == pred.h);
  Vector x(2);
  x << 0.123456789012345, -2.2;
  CHECK(back.map.lift(x) == pred.map.lift(x));
  std::filesystem::remove(path);
}
