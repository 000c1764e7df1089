#include "liftkit/metrics.hpp"

#include "liftkit/edmd.hpp"
#include "liftkit/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace liftkit;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

LiftingMap coordinates_map(int n) {
  std::vector<Observable> obs;
  for (int i = 0; i < n; ++i) {
    obs.push_back(Observable{Observable::Kind::Coordinate, i, 0.0, 1.0, 1});
  }
  return LiftingMap(n, std::move(obs));
}

Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

struct LinearFixture {
  LiftedLinearPredictor exact;
  SnapshotDataset ds;
  std::vector<Trajectory> trajs;
};

/// Discrete linear system with identity lifting: the generating matrices
/// form an exact predictor, so every metric has oracle value 0.
LinearFixture linear_fixture(std::uint64_t seed, int snapshots = 80) {
  Rng rng(seed);
  LinearFixture fx;
  const int n = 3, p = 1;
  Matrix a0 = random_matrix(rng, n, n);
  a0 *= 0.9 / a0.eigenvalues().cwiseAbs().maxCoeff();
  const Matrix b0 = random_matrix(rng, n, p);

  fx.exact.A = a0;
  fx.exact.B = b0;
  fx.exact.C = Matrix::Identity(n, n);
  fx.exact.map = coordinates_map(n);
  fx.exact.h = 0.01;

  fx.ds.map = fx.exact.map;
  fx.ds.X = random_matrix(rng, n, snapshots);
  fx.ds.U = random_matrix(rng, p, snapshots);
  fx.ds.X_lift = fx.ds.X;
  fx.ds.Y_lift = a0 * fx.ds.X + b0 * fx.ds.U;
  fx.ds.h = 0.01;

  for (int t = 0; t < 4; ++t) {
    Trajectory traj;
    traj.h = 0.01;
    traj.inputs = random_matrix(rng, p, 60);
    traj.states.resize(n, 61);
    traj.states.col(0) = random_matrix(rng, n, 1).col(0);
    for (int k = 0; k < 60; ++k) {
      traj.states.col(k + 1) = a0 * traj.states.col(k) + b0 * traj.inputs.col(k);
    }
    fx.trajs.push_back(std::move(traj));
  }
  return fx;
}

EvaluationOptions raw_options() {
  EvaluationOptions opts;
  opts.scaled = false;
  return opts;
}

}  // namespace

TEST_CASE("projected_error: exact predictor scores zero") {
  const LinearFixture fx = linear_fixture(1);
  CHECK(projected_error(fx.exact, fx.ds, raw_options()) < 1e-12);
}

TEST_CASE("projected_error: single snapshot off by 0.5") {
  SnapshotDataset ds;
  ds.map = coordinates_map(1);
  ds.X = Matrix::Zero(1, 1);
  ds.X_lift = ds.X;
  ds.U = Matrix::Zero(1, 1);
  ds.Y_lift = Matrix::Zero(1, 1);
  ds.h = 0.01;

  LiftedLinearPredictor pred;
  pred.map = ds.map;
  pred.A = Matrix::Zero(1, 1);
  pred.B = Matrix::Zero(1, 1);
  pred.C = Matrix::Ones(1, 1);
  pred.h = 0.01;
  ds.Y_lift(0, 0) = 0.5;   // truth is 0.5, prediction is 0
  CHECK(projected_error(pred, ds, raw_options()) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("projected_error: arithmetic mean over snapshots") {
  SnapshotDataset ds;
  ds.map = coordinates_map(1);
  ds.X = Matrix::Zero(1, 2);
  ds.X_lift = ds.X;
  ds.U = Matrix::Zero(1, 2);
  ds.Y_lift.resize(1, 2);
  ds.Y_lift << 1.0, 3.0;   // errors of norm 1 and 3
  ds.h = 0.01;
  LiftedLinearPredictor pred;
  pred.map = ds.map;
  pred.A = Matrix::Zero(1, 1);
  pred.B = Matrix::Zero(1, 1);
  pred.C = Matrix::Ones(1, 1);
  pred.h = 0.01;
  CHECK(projected_error(pred, ds, raw_options()) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("lifted_error equals projected_error under identity lifting") {
  const LinearFixture fx = linear_fixture(2);
  LiftedLinearPredictor off = fx.exact;
  off.A *= 0.97;   // imperfect predictor so both errors are nonzero
  const double proj = projected_error(off, fx.ds, raw_options());
  const double lift = lifted_error(off, fx.ds, raw_options());
  CHECK(proj == doctest::Approx(lift).epsilon(1e-12));
  // And the scaled variants also coincide: lifted ranges equal state ranges.
  CHECK(projected_error(off, fx.ds) == doctest::Approx(lifted_error(off, fx.ds)).epsilon(1e-12));
}

TEST_CASE("lifted_error: same quantity recomputed from the residual matrix") {
  const ContinuousSystem sys = pendulum(PendulumParams{});
  ExcitationSpec spec;
  spec.count = 30;
  spec.seed = 4;
  DictionarySpec dict;
  dict.kind = "sine";
  dict.state_dim = 2;
  const SnapshotDataset ds = assemble(collect(sys, spec), make_dictionary(dict, 0));
  const LiftedLinearPredictor pred = fit(ds).predictor;

  const Matrix resid = ds.Y_lift - pred.A * ds.X_lift - pred.B * ds.U;
  double by_columns = 0.0;
  for (Eigen::Index j = 0; j < resid.cols(); ++j) by_columns += resid.col(j).norm();
  by_columns /= static_cast<double>(resid.cols());

  CHECK(lifted_error(pred, ds, raw_options()) == doctest::Approx(by_columns).epsilon(1e-12));
}

TEST_CASE("prediction_error: exact predictor scores zero") {
  const LinearFixture fx = linear_fixture(3);
  CHECK(prediction_error(fx.exact, fx.trajs, 50, raw_options()) < 1e-12);
}

TEST_CASE("prediction_error: one step with error norm e gives e^2") {
  Trajectory t;
  t.h = 0.01;
  t.states.resize(1, 2);
  t.states << 0.0, 0.7;
  t.inputs = Matrix::Zero(1, 1);
  LiftedLinearPredictor pred;
  pred.map = coordinates_map(1);
  pred.A = Matrix::Zero(1, 1);
  pred.B = Matrix::Zero(1, 1);
  pred.C = Matrix::Ones(1, 1);
  pred.h = 0.01;
  const double err = prediction_error(pred, {t}, 1, raw_options());
  CHECK(err == doctest::Approx(0.49).epsilon(1e-12));
}

TEST_CASE("prediction_error: monotone in the horizon for the local pendulum predictor") {
  const ContinuousSystem sys = pendulum(PendulumParams{});
  ExcitationSpec spec;
  spec.count = 10;
  spec.seed = 12;
  const auto trajs = collect(sys, spec);
  const LiftedLinearPredictor local =
      local_linearization(sys, Vector::Zero(2), Vector::Zero(1), 0.01).predictor;
  double prev = 0.0;
  for (int np : {5, 10, 25, 50}) {
    const double e = prediction_error(local, trajs, np, raw_options());
    CHECK(e >= prev);
    prev = e;
  }
  CHECK(prev > 0.0);
}

TEST_CASE("prediction_error: rejects trajectories shorter than the horizon") {
  const LinearFixture fx = linear_fixture(5);
  CHECK_THROWS_WITH_AS(prediction_error(fx.exact, fx.trajs, 61, raw_options()),
                       doctest::Contains("trajectory 0"), std::invalid_argument);
}

TEST_CASE("scale_states: range [-pi, pi] divides by pi") {
  Matrix cols(1, 3);
  cols << -kPi, 0.0, kPi;
  const auto [scaled, record] = scale_states(cols);
  CHECK(record.center(0) == doctest::Approx(0.0));
  CHECK(record.halfrange(0) == doctest::Approx(kPi));
  CHECK(scaled(0, 0) == doctest::Approx(-1.0));
  CHECK(scaled(0, 2) == doctest::Approx(1.0));
}

TEST_CASE("scale_states: constant state maps to zero with unit scale") {
  Matrix cols = Matrix::Constant(1, 4, 5.0);
  const auto [scaled, record] = scale_states(cols);
  CHECK(record.halfrange(0) == 1.0);
  CHECK(scaled.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scale_states: round trip is the identity within 1e-12") {
  Rng rng(7);
  Matrix cols = random_matrix(rng, 4, 50);
  cols.row(2) *= 100.0;
  const auto [scaled, record] = scale_states(cols);
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    CHECK((record.invert(scaled.col(c)) - cols.col(c)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("metrics are invariant to evaluation-set ordering") {
  const LinearFixture fx = linear_fixture(8);
  LiftedLinearPredictor off = fx.exact;
  off.A *= 0.95;

  SnapshotDataset reversed = fx.ds;
  reversed.X = fx.ds.X.rowwise().reverse();
  reversed.X_lift = fx.ds.X_lift.rowwise().reverse();
  reversed.Y_lift = fx.ds.Y_lift.rowwise().reverse();
  reversed.U = fx.ds.U.rowwise().reverse();

  CHECK(projected_error(off, fx.ds) ==
        doctest::Approx(projected_error(off, reversed)).epsilon(1e-12));
  CHECK(lifted_error(off, fx.ds) ==
        doctest::Approx(lifted_error(off, reversed)).epsilon(1e-12));

  std::vector<Trajectory> shuffled(fx.trajs.rbegin(), fx.trajs.rend());
  CHECK(prediction_error(off, fx.trajs, 30) ==
        doctest::Approx(prediction_error(off, shuffled, 30)).epsilon(1e-12));
}

TEST_CASE("evaluate: full report on the exact fixture") {
  const LinearFixture fx = linear_fixture(9);
  EvaluationOptions opts;
  opts.horizon = 40;
  const EvaluationReport rep = evaluate(fx.exact, fx.ds, fx.trajs, opts);
  CHECK(rep.eps_projected < 1e-8);
  CHECK(rep.eps_lifted < 1e-8);
  CHECK(rep.eps_prediction < 1e-8);
  CHECK(rep.horizon == 40);
  CHECK(rep.per_trajectory.size() == fx.trajs.size());
  CHECK_FALSE(rep.prediction_capped);
  const std::string row = rep.csv_row("fixture", "identity");
  CHECK(row.find("fixture,identity,") == 0);
}

TEST_CASE("masked metrics only score the requested states") {
  const LinearFixture fx = linear_fixture(10);
  LiftedLinearPredictor off = fx.exact;
  off.A.row(2) *= 0.5;   // corrupt only state 3
  EvaluationOptions mask01 = raw_options();
  mask01.state_mask = {0, 1};
  CHECK(projected_error(off, fx.ds, mask01) < 1e-12);
  CHECK(projected_error(off, fx.ds, raw_options()) > 1e-3);
  CHECK(prediction_error(off, fx.trajs, 20, mask01) < 1e-12);
}
