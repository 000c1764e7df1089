#include "liftkit/config.hpp"

#include "liftkit/io.hpp"

namespace liftkit {

namespace {

nlohmann::json pendulum_params_json(const PendulumParams& p) {
  return {{"m", p.m}, {"l", p.l}, {"gamma", p.gamma}, {"g", p.g}};
}

PendulumParams pendulum_params_from(const nlohmann::json& j, PendulumParams d) {
  d.m = j.value("m", d.m);
  d.l = j.value("l", d.l);
  d.gamma = j.value("gamma", d.gamma);
  d.g = j.value("g", d.g);
  return d;
}

nlohmann::json robot_params_json(const RobotParams& p) {
  return {{"wheel_radius", p.wheel_radius},
          {"wheel_mass", p.wheel_mass},
          {"body_mass", p.body_mass},
          {"com_height", p.com_height},
          {"track_width", p.track_width},
          {"pitch_inertia", p.pitch_inertia},
          {"yaw_inertia", p.yaw_inertia},
          {"roll_inertia", p.roll_inertia},
          {"wheel_spin_inertia", p.wheel_spin_inertia},
          {"wheel_yaw_inertia", p.wheel_yaw_inertia},
          {"viscous_friction", p.viscous_friction},
          {"g", p.g}};
}

RobotParams robot_params_from(const nlohmann::json& j, RobotParams d) {
  d.wheel_radius = j.value("wheel_radius", d.wheel_radius);
  d.wheel_mass = j.value("wheel_mass", d.wheel_mass);
  d.body_mass = j.value("body_mass", d.body_mass);
  d.com_height = j.value("com_height", d.com_height);
  d.track_width = j.value("track_width", d.track_width);
  d.pitch_inertia = j.value("pitch_inertia", d.pitch_inertia);
  d.yaw_inertia = j.value("yaw_inertia", d.yaw_inertia);
  d.roll_inertia = j.value("roll_inertia", d.roll_inertia);
  d.wheel_spin_inertia = j.value("wheel_spin_inertia", d.wheel_spin_inertia);
  d.wheel_yaw_inertia = j.value("wheel_yaw_inertia", d.wheel_yaw_inertia);
  d.viscous_friction = j.value("viscous_friction", d.viscous_friction);
  d.g = j.value("g", d.g);
  return d;
}

nlohmann::json pendulum_section_json(const PendulumSection& s) {
  return {{"params", pendulum_params_json(s.params)},
          {"trajectory_count", s.trajectory_count},
          {"trajectory_length_s", s.trajectory_length_s},
          {"eval_count", s.eval_count},
          {"kp_min", s.kp_min},
          {"kp_max", s.kp_max},
          {"perturb_amplitude", s.perturb_amplitude},
          {"perturb_hold_steps", s.perturb_hold_steps},
          {"init_scheme", s.init_scheme},
          {"lqr_qx", s.lqr_qx},
          {"lqr_r", s.lqr_r},
          {"run_duration_s", s.run_duration_s},
          {"swingup_tolerance", s.swingup_tolerance},
          {"swingup_window_s", s.swingup_window_s},
          {"dictionary_extra_count", s.dictionary_extra_count},
          {"metric_horizon", s.metric_horizon}};
}

PendulumSection pendulum_section_from(const nlohmann::json& j, PendulumSection d) {
  if (j.contains("params")) d.params = pendulum_params_from(j.at("params"), d.params);
  d.trajectory_count = j.value("trajectory_count", d.trajectory_count);
  d.trajectory_length_s = j.value("trajectory_length_s", d.trajectory_length_s);
  d.eval_count = j.value("eval_count", d.eval_count);
  d.kp_min = j.value("kp_min", d.kp_min);
  d.kp_max = j.value("kp_max", d.kp_max);
  d.perturb_amplitude = j.value("perturb_amplitude", d.perturb_amplitude);
  d.perturb_hold_steps = j.value("perturb_hold_steps", d.perturb_hold_steps);
  d.init_scheme = j.value("init_scheme", d.init_scheme);
  d.lqr_qx = j.value("lqr_qx", d.lqr_qx);
  d.lqr_r = j.value("lqr_r", d.lqr_r);
  d.run_duration_s = j.value("run_duration_s", d.run_duration_s);
  d.swingup_tolerance = j.value("swingup_tolerance", d.swingup_tolerance);
  d.swingup_window_s = j.value("swingup_window_s", d.swingup_window_s);
  d.dictionary_extra_count = j.value("dictionary_extra_count", d.dictionary_extra_count);
  d.metric_horizon = j.value("metric_horizon", d.metric_horizon);
  return d;
}

nlohmann::json robot_section_json(const RobotSection& s) {
  return {{"params", robot_params_json(s.params)},
          {"trajectory_count", s.trajectory_count},
          {"trajectory_length_s", s.trajectory_length_s},
          {"eval_count", s.eval_count},
          {"perturb_amplitude", s.perturb_amplitude},
          {"perturb_hold_steps", s.perturb_hold_steps},
          {"init_low", s.init_low},
          {"init_high", s.init_high},
          {"collection_lqr_q", s.collection_lqr_q},
          {"collection_lqr_r", s.collection_lqr_r},
          {"ref_amp_min", s.ref_amp_min},
          {"ref_amp_max", s.ref_amp_max},
          {"speed_ref_freq_hz", s.speed_ref_freq_hz},
          {"yaw_ref_freq_hz", s.yaw_ref_freq_hz},
          {"mpc_horizon", s.mpc_horizon},
          {"mpc_q", s.mpc_q},
          {"mpc_qn_scale", s.mpc_qn_scale},
          {"mpc_r", s.mpc_r},
          {"input_bound", s.input_bound},
          {"qp_tol", s.qp_tol},
          {"run_duration_s", s.run_duration_s},
          {"demo_speed_amp", s.demo_speed_amp},
          {"demo_yaw_amp", s.demo_yaw_amp},
          {"fall_angle", s.fall_angle},
          {"metric_horizon", s.metric_horizon}};
}

RobotSection robot_section_from(const nlohmann::json& j, RobotSection d) {
  if (j.contains("params")) d.params = robot_params_from(j.at("params"), d.params);
  d.trajectory_count = j.value("trajectory_count", d.trajectory_count);
  d.trajectory_length_s = j.value("trajectory_length_s", d.trajectory_length_s);
  d.eval_count = j.value("eval_count", d.eval_count);
  d.perturb_amplitude = j.value("perturb_amplitude", d.perturb_amplitude);
  d.perturb_hold_steps = j.value("perturb_hold_steps", d.perturb_hold_steps);
  d.init_low = j.value("init_low", d.init_low);
  d.init_high = j.value("init_high", d.init_high);
  d.collection_lqr_q = j.value("collection_lqr_q", d.collection_lqr_q);
  d.collection_lqr_r = j.value("collection_lqr_r", d.collection_lqr_r);
  d.ref_amp_min = j.value("ref_amp_min", d.ref_amp_min);
  d.ref_amp_max = j.value("ref_amp_max", d.ref_amp_max);
  d.speed_ref_freq_hz = j.value("speed_ref_freq_hz", d.speed_ref_freq_hz);
  d.yaw_ref_freq_hz = j.value("yaw_ref_freq_hz", d.yaw_ref_freq_hz);
  d.mpc_horizon = j.value("mpc_horizon", d.mpc_horizon);
  d.mpc_q = j.value("mpc_q", d.mpc_q);
  d.mpc_qn_scale = j.value("mpc_qn_scale", d.mpc_qn_scale);
  d.mpc_r = j.value("mpc_r", d.mpc_r);
  d.input_bound = j.value("input_bound", d.input_bound);
  d.qp_tol = j.value("qp_tol", d.qp_tol);
  d.run_duration_s = j.value("run_duration_s", d.run_duration_s);
  d.demo_speed_amp = j.value("demo_speed_amp", d.demo_speed_amp);
  d.demo_yaw_amp = j.value("demo_yaw_amp", d.demo_yaw_amp);
  d.fall_angle = j.value("fall_angle", d.fall_angle);
  d.metric_horizon = j.value("metric_horizon", d.metric_horizon);
  return d;
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json cl{{"duration_s", closed_loop.duration_s},
                    {"demo_references", closed_loop.demo_references}};
  if (!closed_loop.x0.empty()) cl["x0"] = closed_loop.x0;
  return {{"seed", seed},
          {"h", h},
          {"system", system},
          {"metric_scaled", metric_scaled},
          {"dictionary", dictionary.to_json()},
          {"pendulum", pendulum_section_json(pendulum)},
          {"robot", robot_section_json(robot)},
          {"closed_loop", cl}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.h = j.value("h", cfg.h);
  cfg.system = j.value("system", cfg.system);
  cfg.metric_scaled = j.value("metric_scaled", cfg.metric_scaled);
  if (j.contains("dictionary")) {
    cfg.dictionary = DictionarySpec::from_json(j.at("dictionary"));
  }
  if (j.contains("pendulum")) {
    cfg.pendulum = pendulum_section_from(j.at("pendulum"), cfg.pendulum);
  }
  if (j.contains("robot")) cfg.robot = robot_section_from(j.at("robot"), cfg.robot);
  if (j.contains("closed_loop")) {
    const auto& cl = j.at("closed_loop");
    cfg.closed_loop.x0 = cl.value("x0", cfg.closed_loop.x0);
    cfg.closed_loop.duration_s = cl.value("duration_s", cfg.closed_loop.duration_s);
    cfg.closed_loop.demo_references =
        cl.value("demo_references", cfg.closed_loop.demo_references);
  }
  if (cfg.system != "pendulum" && cfg.system != "robot") {
    throw ConfigError("config: system must be 'pendulum' or 'robot'");
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  try {
    return from_json(read_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: cannot parse " + path.string() + ": " + e.what());
  }
}

}  // namespace liftkit
