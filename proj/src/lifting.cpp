#include "liftkit/lifting.hpp"

#include "liftkit/rng.hpp"

#include <algorithm>
#include <cmath>

namespace liftkit {

double tps_rbf(double center, double phi) {
  const double r = std::abs(phi - center);
  if (r == 0.0) return 0.0;
  return r * r * std::log(r);
}

double gaussian_rbf(double center, double width, double phi) {
  if (width <= 0.0) {
    throw std::invalid_argument("gaussian_rbf: width must be positive");
  }
  const double d = phi - center;
  return std::exp(-d * d / (2.0 * width * width));
}

double monomial(int i, double phi) {
  if (i < 1) throw std::invalid_argument("monomial: index must be >= 1");
  return std::pow(phi, i - 1);
}

double Observable::eval(const Vector& x) const {
  switch (kind) {
    case Kind::Coordinate:
      return x(index);
    case Kind::SineOfCoordinate:
      return std::sin(x(index));
    case Kind::Monomial:
      return monomial(degree, x(index));
    case Kind::TpsRbf:
      return tps_rbf(center, x(index));
    case Kind::GaussianRbf:
      return gaussian_rbf(center, width, x(index));
  }
  throw std::logic_error("Observable: unknown kind");
}

std::string Observable::label() const {
  const std::string xi = "x" + std::to_string(index + 1);
  switch (kind) {
    case Kind::Coordinate:
      return xi;
    case Kind::SineOfCoordinate:
      return "sin(" + xi + ")";
    case Kind::Monomial:
      return xi + "^" + std::to_string(degree - 1);
    case Kind::TpsRbf:
      return "tps(" + xi + ")";
    case Kind::GaussianRbf:
      return "gauss(" + xi + ")";
  }
  return "?";
}

LiftingMap::LiftingMap(int state_dim, std::vector<Observable> observables)
    : state_dim_(state_dim), observables_(std::move(observables)) {
  coordinate_rows_.assign(state_dim_, -1);
  for (size_t j = 0; j < observables_.size(); ++j) {
    const Observable& o = observables_[j];
    if (o.index < 0 || o.index >= state_dim_) {
      throw std::invalid_argument("LiftingMap: observable index out of range");
    }
    if (o.kind == Observable::Kind::Coordinate && coordinate_rows_[o.index] < 0) {
      coordinate_rows_[o.index] = static_cast<int>(j);
    }
  }
}

Vector LiftingMap::lift(const Vector& x) const {
  if (x.size() != state_dim_) {
    throw std::invalid_argument("lift: state dimension mismatch");
  }
  Vector z(lifted_dim());
  for (int j = 0; j < lifted_dim(); ++j) z(j) = observables_[j].eval(x);
  return z;
}

Matrix LiftingMap::lift_columns(const Matrix& states) const {
  Matrix z(lifted_dim(), states.cols());
  for (Eigen::Index c = 0; c < states.cols(); ++c) {
    z.col(c) = lift(states.col(c));
  }
  return z;
}

int LiftingMap::coordinate_row(int state_index) const {
  if (state_index < 0 || state_index >= state_dim_) {
    throw std::out_of_range("coordinate_row: state index out of range");
  }
  return coordinate_rows_[state_index];
}

bool LiftingMap::has_all_coordinates() const {
  return std::all_of(coordinate_rows_.begin(), coordinate_rows_.end(),
                     [](int r) { return r >= 0; });
}

Matrix LiftingMap::selector() const {
  if (!has_all_coordinates()) {
    throw std::logic_error("selector: map does not contain every coordinate observable");
  }
  Matrix c = Matrix::Zero(state_dim_, lifted_dim());
  for (int i = 0; i < state_dim_; ++i) c(i, coordinate_rows_[i]) = 1.0;
  return c;
}

std::vector<std::string> LiftingMap::labels() const {
  std::vector<std::string> out;
  out.reserve(observables_.size());
  for (const Observable& o : observables_) out.push_back(o.label());
  return out;
}

namespace {

std::string kind_name(Observable::Kind k) {
  switch (k) {
    case Observable::Kind::Coordinate: return "coordinate";
    case Observable::Kind::SineOfCoordinate: return "sine";
    case Observable::Kind::Monomial: return "monomial";
    case Observable::Kind::TpsRbf: return "tps_rbf";
    case Observable::Kind::GaussianRbf: return "gaussian_rbf";
  }
  return "?";
}

Observable::Kind kind_from_name(const std::string& s) {
  if (s == "coordinate") return Observable::Kind::Coordinate;
  if (s == "sine") return Observable::Kind::SineOfCoordinate;
  if (s == "monomial") return Observable::Kind::Monomial;
  if (s == "tps_rbf") return Observable::Kind::TpsRbf;
  if (s == "gaussian_rbf") return Observable::Kind::GaussianRbf;
  throw ConfigError("unknown observable kind: " + s);
}

nlohmann::json observable_to_json(const Observable& o) {
  nlohmann::json j{{"kind", kind_name(o.kind)}, {"index", o.index}};
  if (o.kind == Observable::Kind::TpsRbf || o.kind == Observable::Kind::GaussianRbf) {
    j["center"] = o.center;
  }
  if (o.kind == Observable::Kind::GaussianRbf) j["width"] = o.width;
  if (o.kind == Observable::Kind::Monomial) j["degree"] = o.degree;
  return j;
}

Observable observable_from_json(const nlohmann::json& j) {
  Observable o;
  o.kind = kind_from_name(j.at("kind").get<std::string>());
  o.index = j.at("index").get<int>();
  o.center = j.value("center", 0.0);
  o.width = j.value("width", 1.0);
  o.degree = j.value("degree", 1);
  return o;
}

}  // namespace

nlohmann::json LiftingMap::to_json() const {
  nlohmann::json obs = nlohmann::json::array();
  for (const Observable& o : observables_) obs.push_back(observable_to_json(o));
  return nlohmann::json{{"state_dim", state_dim_}, {"observables", std::move(obs)}};
}

LiftingMap LiftingMap::from_json(const nlohmann::json& j) {
  std::vector<Observable> obs;
  for (const auto& jo : j.at("observables")) obs.push_back(observable_from_json(jo));
  return LiftingMap(j.at("state_dim").get<int>(), std::move(obs));
}

nlohmann::json DictionarySpec::to_json() const {
  nlohmann::json j{{"kind", kind},
                   {"state_dim", state_dim},
                   {"angle_index", angle_index},
                   {"extra_count", extra_count},
                   {"center_min", center_min},
                   {"center_max", center_max},
                   {"width_min", width_min},
                   {"width_max", width_max}};
  if (!coordinate_subset.empty()) j["coordinate_subset"] = coordinate_subset;
  if (!custom_observables.empty()) {
    nlohmann::json obs = nlohmann::json::array();
    for (const Observable& o : custom_observables) obs.push_back(observable_to_json(o));
    j["custom_observables"] = std::move(obs);
  }
  return j;
}

DictionarySpec DictionarySpec::from_json(const nlohmann::json& j) {
  DictionarySpec s;
  s.kind = j.value("kind", s.kind);
  s.state_dim = j.value("state_dim", s.state_dim);
  s.angle_index = j.value("angle_index", s.angle_index);
  s.coordinate_subset = j.value("coordinate_subset", s.coordinate_subset);
  s.extra_count = j.value("extra_count", s.extra_count);
  s.center_min = j.value("center_min", s.center_min);
  s.center_max = j.value("center_max", s.center_max);
  s.width_min = j.value("width_min", s.width_min);
  s.width_max = j.value("width_max", s.width_max);
  if (j.contains("custom_observables")) {
    for (const auto& jo : j.at("custom_observables")) {
      s.custom_observables.push_back(observable_from_json(jo));
    }
  }
  return s;
}

LiftingMap make_dictionary(const DictionarySpec& spec, std::uint64_t seed) {
  if (spec.state_dim <= 0) throw ConfigError("make_dictionary: state_dim must be positive");
  if (spec.angle_index < 0 || spec.angle_index >= spec.state_dim) {
    throw ConfigError("make_dictionary: angle_index out of range");
  }

  std::vector<Observable> obs;
  std::vector<int> coords = spec.coordinate_subset;
  if (coords.empty()) {
    for (int i = 0; i < spec.state_dim; ++i) coords.push_back(i);
  }
  for (int i : coords) {
    if (i < 0 || i >= spec.state_dim) {
      throw ConfigError("make_dictionary: coordinate subset index out of range");
    }
    obs.push_back(Observable{Observable::Kind::Coordinate, i, 0.0, 1.0, 1});
  }

  Rng rng(seed);
  if (spec.kind == "sine") {
    obs.push_back(Observable{Observable::Kind::SineOfCoordinate, spec.angle_index, 0.0, 1.0, 1});
  } else if (spec.kind == "poly") {
    for (int i = 1; i <= spec.extra_count; ++i) {
      obs.push_back(Observable{Observable::Kind::Monomial, spec.angle_index, 0.0, 1.0, i});
    }
  } else if (spec.kind == "tps") {
    for (int i = 0; i < spec.extra_count; ++i) {
      const double a = rng.uniform(spec.center_min, spec.center_max);
      obs.push_back(Observable{Observable::Kind::TpsRbf, spec.angle_index, a, 1.0, 1});
    }
  } else if (spec.kind == "gauss") {
    for (int i = 0; i < spec.extra_count; ++i) {
      const double b = rng.uniform(spec.center_min, spec.center_max);
      const double c = rng.uniform(spec.width_min, spec.width_max);
      obs.push_back(Observable{Observable::Kind::GaussianRbf, spec.angle_index, b, c, 1});
    }
  } else if (spec.kind == "custom") {
    obs.insert(obs.end(), spec.custom_observables.begin(), spec.custom_observables.end());
  } else {
    throw ConfigError("make_dictionary: unknown dictionary kind '" + spec.kind + "'");
  }
  return LiftingMap(spec.state_dim, std::move(obs));
}

}  // namespace liftkit
