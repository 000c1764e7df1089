#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace liftkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// An iterative numerical routine ran out of its iteration budget or
/// diverged. Carries the last residual it observed.
class NumericsError : public std::runtime_error {
 public:
  NumericsError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A simulation produced a non-finite or unbounded state.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step)
      : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool is_finite(const Matrix& m) { return m.allFinite(); }

inline void require_finite(const Matrix& m, const std::string& name) {
  if (!m.allFinite()) {
    throw std::invalid_argument(name + " has non-finite entries");
  }
}

}  // namespace liftkit
