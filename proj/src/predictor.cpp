#include "liftkit/predictor.hpp"

#include "liftkit/io.hpp"

#include <functional>

namespace liftkit {

void LiftedLinearPredictor::validate() const {
  const int N = lifted_dim();
  if (A.cols() != N || B.rows() != N || C.cols() != N) {
    throw std::invalid_argument("LiftedLinearPredictor: inconsistent dimensions");
  }
  if (map.lifted_dim() != N || map.state_dim() != state_dim()) {
    throw std::invalid_argument("LiftedLinearPredictor: map does not match matrices");
  }
  require_finite(A, "predictor A");
  require_finite(B, "predictor B");
  require_finite(C, "predictor C");
}

nlohmann::json LiftedLinearPredictor::to_json() const {
  return nlohmann::json{{"type", "lifted_linear_predictor"},
                        {"state_dim", state_dim()},
                        {"input_dim", input_dim()},
                        {"lifted_dim", lifted_dim()},
                        {"sample_time", h},
                        {"lifting", map.to_json()},
                        {"A", matrix_to_json(A)},
                        {"B", matrix_to_json(B)},
                        {"C", matrix_to_json(C)}};
}

LiftedLinearPredictor LiftedLinearPredictor::from_json(const nlohmann::json& j) {
  LiftedLinearPredictor p;
  p.A = matrix_from_json(j.at("A"));
  p.B = matrix_from_json(j.at("B"));
  p.C = matrix_from_json(j.at("C"));
  p.map = LiftingMap::from_json(j.at("lifting"));
  p.h = j.at("sample_time").get<double>();
  p.validate();
  return p;
}

void LiftedLinearPredictor::save(const std::filesystem::path& path) const {
  write_json(path, to_json());
}

LiftedLinearPredictor LiftedLinearPredictor::load(const std::filesystem::path& path) {
  return from_json(read_json(path));
}

namespace {

Trajectory rollout(const LiftingMap& map, const Matrix& C, double h, const Vector& x0,
                   const Matrix& inputs,
                   const std::function<Vector(const Vector&, const Vector&)>& step) {
  const Eigen::Index L = inputs.cols();
  Trajectory t;
  t.h = h;
  t.states.resize(C.rows(), L + 1);
  t.inputs = inputs;
  Vector z = map.lift(x0);
  t.states.col(0) = C * z;
  for (Eigen::Index k = 0; k < L; ++k) {
    z = step(z, inputs.col(k));
    t.states.col(k + 1) = C * z;
  }
  return t;
}

}  // namespace

Trajectory predict_llp(const LiftedLinearPredictor& pred, const Vector& x0,
                       const Matrix& inputs) {
  return rollout(pred.map, pred.C, pred.h, x0, inputs,
                 [&](const Vector& z, const Vector& u) -> Vector {
                   return pred.A * z + pred.B * u;
                 });
}

namespace {

Vector bilinear_input_term(const BilinearPredictor& pred, const Vector& z, const Vector& u) {
  Vector acc = Vector::Zero(z.size());
  for (int j = 0; j < pred.input_dim(); ++j) acc += u(j) * (pred.B[j] * z);
  return acc;
}

}  // namespace

Trajectory predict_bilinear(const BilinearPredictor& pred, const Vector& x0,
                            const Matrix& inputs) {
  return rollout(pred.map, pred.C, pred.h, x0, inputs,
                 [&](const Vector& z, const Vector& u) -> Vector {
                   return pred.A * z + bilinear_input_term(pred, z, u);
                 });
}

Trajectory predict_project_and_lift(const LiftedLinearPredictor& pred, const Vector& x0,
                                    const Matrix& inputs) {
  return rollout(pred.map, pred.C, pred.h, x0, inputs,
                 [&](const Vector& z, const Vector& u) -> Vector {
                   return pred.A * pred.map.lift(pred.C * z) + pred.B * u;
                 });
}

Trajectory predict_project_and_lift(const BilinearPredictor& pred, const Vector& x0,
                                    const Matrix& inputs) {
  return rollout(pred.map, pred.C, pred.h, x0, inputs,
                 [&](const Vector& z, const Vector& u) -> Vector {
                   return pred.A * pred.map.lift(pred.C * z) +
                          bilinear_input_term(pred, z, u);
                 });
}

}  // namespace liftkit
