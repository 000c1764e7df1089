#include "liftkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace liftkit {

namespace {

constexpr double kPredictionCap = 1e30;

std::vector<int> effective_mask(const std::vector<int>& mask, int n) {
  if (mask.empty()) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  for (int i : mask) {
    if (i < 0 || i >= n) throw std::invalid_argument("metrics: state mask index out of range");
  }
  return mask;
}

}  // namespace

StateScaling StateScaling::identity(int n) {
  return StateScaling{Vector::Zero(n), Vector::Ones(n)};
}

StateScaling StateScaling::from_columns(const Matrix& cols) {
  StateScaling s;
  const Vector lo = cols.rowwise().minCoeff();
  const Vector hi = cols.rowwise().maxCoeff();
  s.center = 0.5 * (lo + hi);
  s.halfrange = 0.5 * (hi - lo);
  for (Eigen::Index i = 0; i < s.halfrange.size(); ++i) {
    if (s.halfrange(i) <= 0.0) s.halfrange(i) = 1.0;   // degenerate-state convention
  }
  return s;
}

StateScaling StateScaling::from_trajectories(const std::vector<Trajectory>& trajs) {
  if (trajs.empty()) throw std::invalid_argument("StateScaling: no trajectories");
  Eigen::Index total = 0;
  for (const Trajectory& t : trajs) total += t.states.cols();
  Matrix all(trajs[0].state_dim(), total);
  Eigen::Index col = 0;
  for (const Trajectory& t : trajs) {
    all.middleCols(col, t.states.cols()) = t.states;
    col += t.states.cols();
  }
  return from_columns(all);
}

Vector StateScaling::apply(const Vector& x) const {
  return (x - center).cwiseQuotient(halfrange);
}

Vector StateScaling::invert(const Vector& scaled) const {
  return scaled.cwiseProduct(halfrange) + center;
}

Matrix StateScaling::apply_columns(const Matrix& states) const {
  return halfrange.cwiseInverse().asDiagonal() * (states.colwise() - center);
}

std::pair<Matrix, StateScaling> scale_states(const Matrix& state_columns) {
  const StateScaling s = StateScaling::from_columns(state_columns);
  return {s.apply_columns(state_columns), s};
}

std::pair<std::vector<Trajectory>, StateScaling> scale_states(
    const std::vector<Trajectory>& trajs) {
  const StateScaling s = StateScaling::from_trajectories(trajs);
  std::vector<Trajectory> out = trajs;
  for (Trajectory& t : out) t.states = s.apply_columns(t.states);
  return {std::move(out), s};
}

namespace {

/// Raw successor states for the masked components, recovered from the
/// coordinate rows of Y_lift.
Matrix successor_states(const SnapshotDataset& ds, const std::vector<int>& mask) {
  Matrix y(mask.size(), ds.size());
  for (size_t i = 0; i < mask.size(); ++i) {
    const int row = ds.map.coordinate_row(mask[i]);
    if (row < 0) {
      throw std::invalid_argument(
          "metrics: state " + std::to_string(mask[i]) +
          " has no coordinate observable in the map; cannot recover successors");
    }
    y.row(i) = ds.Y_lift.row(row);
  }
  return y;
}

Vector mask_weights(const StateScaling& s, const std::vector<int>& mask, bool scaled) {
  Vector w = Vector::Ones(mask.size());
  if (!scaled) return w;
  for (size_t i = 0; i < mask.size(); ++i) w(i) = 1.0 / s.halfrange(mask[i]);
  return w;
}

}  // namespace

double projected_error(const LiftedLinearPredictor& pred, const SnapshotDataset& ds,
                       const EvaluationOptions& opts) {
  if (ds.size() < 1) throw std::invalid_argument("projected_error: empty dataset");
  const std::vector<int> mask = effective_mask(opts.state_mask, pred.state_dim());
  const Matrix pred_full = pred.C * (pred.A * ds.X_lift + pred.B * ds.U);   // n x N_d
  Matrix pred_masked(mask.size(), ds.size());
  for (size_t i = 0; i < mask.size(); ++i) pred_masked.row(i) = pred_full.row(mask[i]);
  const Matrix truth = successor_states(ds, mask);
  const StateScaling scaling = StateScaling::from_columns(ds.X);
  const Vector w = mask_weights(scaling, mask, opts.scaled);
  const Matrix err = w.asDiagonal() * (truth - pred_masked);
  return err.colwise().norm().mean();
}

double lifted_error(const LiftedLinearPredictor& pred, const SnapshotDataset& ds,
                    const EvaluationOptions& opts) {
  if (ds.size() < 1) throw std::invalid_argument("lifted_error: empty dataset");
  Matrix resid = ds.Y_lift - pred.A * ds.X_lift - pred.B * ds.U;
  if (opts.scaled) {
    const StateScaling lifted_scaling = StateScaling::from_columns(ds.X_lift);
    resid = lifted_scaling.halfrange.cwiseInverse().asDiagonal() * resid;
  }
  return resid.colwise().norm().mean();
}

double prediction_error(const LiftedLinearPredictor& pred,
                        const std::vector<Trajectory>& eval_trajs, int horizon,
                        const EvaluationOptions& opts, std::vector<double>* per_trajectory,
                        bool* capped_out) {
  if (eval_trajs.empty()) throw std::invalid_argument("prediction_error: no trajectories");
  if (horizon < 1) throw std::invalid_argument("prediction_error: horizon must be >= 1");
  const std::vector<int> mask = effective_mask(opts.state_mask, pred.state_dim());
  const StateScaling scaling = StateScaling::from_trajectories(eval_trajs);
  const Vector w = mask_weights(scaling, mask, opts.scaled);

  if (per_trajectory) per_trajectory->clear();
  bool capped = false;
  double sum = 0.0;
  for (size_t ti = 0; ti < eval_trajs.size(); ++ti) {
    const Trajectory& t = eval_trajs[ti];
    if (t.length() < horizon) {
      throw std::invalid_argument("prediction_error: trajectory " + std::to_string(ti) +
                                  " is shorter than the horizon");
    }
    const Trajectory hat =
        predict_llp(pred, t.states.col(0), t.inputs.leftCols(horizon));
    double term = 0.0;
    for (int k = 0; k < horizon; ++k) {
      double sq = 0.0;
      for (size_t i = 0; i < mask.size(); ++i) {
        const double e = w(i) * (t.states(mask[i], k + 1) - hat.states(mask[i], k + 1));
        sq += e * e;
      }
      term += sq;
      if (!std::isfinite(term) || term > kPredictionCap) {
        term = kPredictionCap;
        capped = true;
        break;
      }
    }
    if (per_trajectory) per_trajectory->push_back(term);
    sum += term;
  }
  if (capped_out) *capped_out = capped;
  return sum / static_cast<double>(eval_trajs.size());
}

nlohmann::json EvaluationReport::to_json() const {
  nlohmann::json j{{"eps_projected", eps_projected},
                   {"eps_lifted", eps_lifted},
                   {"eps_prediction", eps_prediction},
                   {"horizon", horizon},
                   {"scaled", scaled},
                   {"prediction_capped", prediction_capped},
                   {"per_trajectory", per_trajectory}};
  if (scaling_center.size()) {
    j["scaling_center"] = std::vector<double>(scaling_center.data(),
                                              scaling_center.data() + scaling_center.size());
    j["scaling_halfrange"] = std::vector<double>(
        scaling_halfrange.data(), scaling_halfrange.data() + scaling_halfrange.size());
  }
  if (!state_mask.empty()) j["state_mask"] = state_mask;
  return j;
}

std::string EvaluationReport::csv_header() {
  return "experiment,dictionary,eps_projected,eps_lifted,eps_prediction,horizon";
}

namespace {
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}
}  // namespace

std::string EvaluationReport::csv_row(const std::string& experiment_id,
                                      const std::string& dictionary) const {
  return experiment_id + "," + dictionary + "," + fmt(eps_projected) + "," +
         fmt(eps_lifted) + "," + fmt(eps_prediction) + "," + std::to_string(horizon);
}

EvaluationReport evaluate(const LiftedLinearPredictor& pred, const SnapshotDataset& ds,
                          const std::vector<Trajectory>& eval_trajs,
                          const EvaluationOptions& opts) {
  EvaluationReport rep;
  rep.horizon = opts.horizon;
  rep.scaled = opts.scaled;
  rep.state_mask = opts.state_mask;
  rep.eps_projected = projected_error(pred, ds, opts);
  rep.eps_lifted = lifted_error(pred, ds, opts);
  rep.eps_prediction = prediction_error(pred, eval_trajs, opts.horizon, opts,
                                        &rep.per_trajectory, &rep.prediction_capped);
  const StateScaling scaling = StateScaling::from_trajectories(eval_trajs);
  rep.scaling_center = scaling.center;
  rep.scaling_halfrange = scaling.halfrange;
  return rep;
}

}  // namespace liftkit
