#pragma once

#include "liftkit/dynamics.hpp"
#include "liftkit/lifting.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace liftkit {

/// Pendulum case-study settings: data collection, LQR weights, swing-up run.
struct PendulumSection {
  PendulumParams params;
  int trajectory_count = 2100;
  double trajectory_length_s = 0.5;
  int eval_count = 100;
  double kp_min = 10.0;
  double kp_max = 200.0;
  double perturb_amplitude = 2.0;
  int perturb_hold_steps = 5;
  std::string init_scheme = "uniform";   // data-collection initial states
  std::vector<double> lqr_qx = {10.0, 1.0};
  std::vector<double> lqr_r = {0.1};
  double run_duration_s = 5.0;
  double swingup_tolerance = 0.05;
  double swingup_window_s = 1.0;
  int dictionary_extra_count = 100;   // per 100-observable dictionary
  int metric_horizon = 50;
};

/// Robot case-study settings: collection controller, references, MPC.
struct RobotSection {
  RobotParams params;
  int trajectory_count = 2000;
  double trajectory_length_s = 1.0;
  int eval_count = 1000;
  double perturb_amplitude = 0.5;
  int perturb_hold_steps = 5;
  std::vector<double> init_low = {-0.3, -0.3, -0.3, -1.0, -0.15, -1.0};
  std::vector<double> init_high = {0.3, 0.3, 0.3, 1.0, 0.15, 1.0};
  std::vector<double> collection_lqr_q = {5.0, 1.0, 5.0, 20.0};   // (sdot, phidot, chidot, phi)
  std::vector<double> collection_lqr_r = {0.1, 0.1};
  double ref_amp_min = 0.0;
  double ref_amp_max = 1.0;
  double speed_ref_freq_hz = 0.5;
  double yaw_ref_freq_hz = 0.3;
  int mpc_horizon = 50;
  std::vector<double> mpc_q = {5.0, 1.0, 5.0, 0.0, 20.0, 0.0};
  double mpc_qn_scale = 10.0;
  std::vector<double> mpc_r = {0.1, 0.1};
  double input_bound = 5.0;
  double qp_tol = 1e-7;
  double run_duration_s = 10.0;
  double demo_speed_amp = 0.5;
  double demo_yaw_amp = 0.5;
  double fall_angle = 1.5707963267948966;   // |phi| beyond this means fallen
  int metric_horizon = 50;
};

/// Standalone `mpc` command settings.
struct ClosedLoopSection {
  std::vector<double> x0;
  double duration_s = 10.0;
  bool demo_references = true;
};

struct ExperimentConfig {
  std::uint64_t seed = 20240101;
  double h = 0.01;
  std::string system = "pendulum";   // pendulum | robot
  bool metric_scaled = true;
  DictionarySpec dictionary;         // used by the standalone collect/fit commands
  PendulumSection pendulum;
  RobotSection robot;
  ClosedLoopSection closed_loop;

  nlohmann::json to_json() const;
  /// Overlay of a (possibly partial) JSON document onto the defaults.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
};

}  // namespace liftkit
