#pragma once

#include "liftkit/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace liftkit {

/// Thin-plate-spline radial basis r^2 log r with r = |phi - center|.
/// Defined as 0 at r = 0 (the analytic limit).
double tps_rbf(double center, double phi);

/// exp(-(phi - center)^2 / (2 width^2)); width must be positive.
double gaussian_rbf(double center, double width, double phi);

/// phi^(i-1) for i >= 1, so the first basis element is the constant 1.
double monomial(int i, double phi);

/// One scalar observable psi: R^n -> R.
struct Observable {
  enum class Kind { Coordinate, SineOfCoordinate, Monomial, TpsRbf, GaussianRbf };

  Kind kind = Kind::Coordinate;
  int index = 0;        // state coordinate the observable reads
  double center = 0.0;  // TpsRbf / GaussianRbf
  double width = 1.0;   // GaussianRbf
  int degree = 1;       // Monomial: evaluates to x^(degree-1)

  double eval(const Vector& x) const;
  std::string label() const;
};

/// Ordered observable set defining the lifting Psi: R^n -> R^N. Immutable
/// after construction.
class LiftingMap {
 public:
  LiftingMap() = default;
  LiftingMap(int state_dim, std::vector<Observable> observables);

  int state_dim() const { return state_dim_; }
  int lifted_dim() const { return static_cast<int>(observables_.size()); }
  const std::vector<Observable>& observables() const { return observables_; }

  Vector lift(const Vector& x) const;
  Matrix lift_columns(const Matrix& states) const;

  /// Lifted index of the coordinate observable for state i, or -1.
  int coordinate_row(int state_index) const;
  bool has_all_coordinates() const;

  /// Exact selector C with C * Psi(x) = x; requires all coordinates present.
  Matrix selector() const;

  std::vector<std::string> labels() const;

  nlohmann::json to_json() const;
  static LiftingMap from_json(const nlohmann::json& j);

 private:
  int state_dim_ = 0;
  std::vector<Observable> observables_;
  std::vector<int> coordinate_rows_;   // per original state, -1 if absent
};

/// Recipe for a dictionary of observables. Coordinate observables (all of
/// them, or the listed subset, in index order) always come first.
struct DictionarySpec {
  std::string kind = "sine";            // sine | tps | poly | gauss | custom
  int state_dim = 2;
  int angle_index = 0;                  // coordinate the nonlinear observables read
  std::vector<int> coordinate_subset;   // empty = all coordinates
  int extra_count = 100;                // tps / poly / gauss only
  double center_min = -3.141592653589793;
  double center_max = 3.141592653589793;
  double width_min = 0.2;
  double width_max = 1.5;
  std::vector<Observable> custom_observables;   // kind == custom

  nlohmann::json to_json() const;
  static DictionarySpec from_json(const nlohmann::json& j);
};

/// Deterministic map construction; random centers and widths are drawn
/// from the stream seeded by `seed`.
LiftingMap make_dictionary(const DictionarySpec& spec, std::uint64_t seed);

}  // namespace liftkit
