#include "liftkit/config.hpp"
#include "liftkit/control.hpp"
#include "liftkit/datagen.hpp"
#include "liftkit/edmd.hpp"
#include "liftkit/experiments.hpp"
#include "liftkit/io.hpp"
#include "liftkit/metrics.hpp"
#include "liftkit/rng.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace {

using namespace liftkit;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerics = 3;
constexpr int kExitFailureFlag = 4;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string format = "json";
};

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig cfg =
      args.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  return cfg;
}

ContinuousSystem make_system(const ExperimentConfig& cfg) {
  return cfg.system == "robot" ? robot(cfg.robot.params) : pendulum(cfg.pendulum.params);
}

/// Data-collection spec for the configured system, mirroring the
/// experiment drivers.
ExcitationSpec make_excitation(const ExperimentConfig& cfg, const ContinuousSystem& sys) {
  ExcitationSpec spec;
  spec.h = cfg.h;
  if (cfg.system == "pendulum") {
    spec.mode = ExcitationMode::ProportionalFeedback;
    spec.count = cfg.pendulum.trajectory_count;
    spec.length_s = cfg.pendulum.trajectory_length_s;
    spec.kp_min = cfg.pendulum.kp_min;
    spec.kp_max = cfg.pendulum.kp_max;
    spec.perturb_amplitude = cfg.pendulum.perturb_amplitude;
    spec.perturb_hold_steps = cfg.pendulum.perturb_hold_steps;
    if (cfg.pendulum.init_scheme == "near_stable") {
      spec.init_scheme = InitScheme::NearStable;
    } else if (cfg.pendulum.init_scheme == "near_unstable") {
      spec.init_scheme = InitScheme::NearUnstable;
    } else {
      spec.init_scheme = InitScheme::UniformAngle;
    }
  } else {
    const LiftedLinearPredictor local =
        local_linearization(sys, Vector::Zero(6), Vector::Zero(2), cfg.h).predictor;
    Matrix a4(4, 4), b4(4, 2);
    const int idx[4] = {0, 1, 2, 4};
    for (int i = 0; i < 4; ++i) {
      b4.row(i) = local.B.row(idx[i]);
      for (int j = 0; j < 4; ++j) a4(i, j) = local.A(idx[i], idx[j]);
    }
    Matrix q4 = Matrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) q4(i, i) = cfg.robot.collection_lqr_q[i];
    Matrix r2 = Matrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i) r2(i, i) = cfg.robot.collection_lqr_r[i];
    const DareSolution sol = solve_dare(a4, b4, q4, r2);
    spec.mode = ExcitationMode::LqrFeedback;
    spec.lqr_gain = Matrix::Zero(2, 6);
    for (int j = 0; j < 4; ++j) spec.lqr_gain.col(idx[j]) = sol.K.col(j);
    spec.count = cfg.robot.trajectory_count;
    spec.length_s = cfg.robot.trajectory_length_s;
    spec.perturb_amplitude = cfg.robot.perturb_amplitude;
    spec.perturb_hold_steps = cfg.robot.perturb_hold_steps;
    spec.reference_channels = {
        ReferenceChannel{0, cfg.robot.speed_ref_freq_hz, cfg.robot.ref_amp_min,
                         cfg.robot.ref_amp_max},
        ReferenceChannel{2, cfg.robot.yaw_ref_freq_hz, cfg.robot.ref_amp_min,
                         cfg.robot.ref_amp_max}};
    spec.init_scheme = InitScheme::Box;
    spec.init_low = Vector(6);
    spec.init_high = Vector(6);
    for (int i = 0; i < 6; ++i) {
      spec.init_low(i) = cfg.robot.init_low[i];
      spec.init_high(i) = cfg.robot.init_high[i];
    }
  }
  spec.seed = derive_seed(cfg.seed, "cli/collect");
  return spec;
}

DictionarySpec effective_dictionary(const ExperimentConfig& cfg) {
  DictionarySpec dict = cfg.dictionary;
  if (cfg.system == "robot" && dict.state_dim == 2) {
    // Default robot dictionary when the config still holds the pendulum one.
    dict.state_dim = 6;
    dict.angle_index = 4;
    dict.coordinate_subset = {0, 1, 2, 4};
  }
  return dict;
}

int cmd_collect(const CommonArgs& args) {
  const ExperimentConfig cfg = load_config(args);
  const ContinuousSystem sys = make_system(cfg);
  const ExcitationSpec spec = make_excitation(cfg, sys);
  const auto trajs = collect(sys, spec);
  const int eval_count =
      cfg.system == "robot" ? cfg.robot.eval_count : cfg.pendulum.eval_count;
  const auto [train, eval] = split(trajs, eval_count, derive_seed(cfg.seed, "cli/split"));

  const LiftingMap map =
      make_dictionary(effective_dictionary(cfg), derive_seed(cfg.seed, "cli/dictionary"));
  const std::filesystem::path out(args.out);
  save_dataset(out / "train", assemble(train, map), cfg.to_json());
  if (!eval.empty()) {
    save_dataset(out / "eval", assemble(eval, map), cfg.to_json());
    write_trajectories_csv(out / "eval_trajectories.csv", eval);
  }
  std::printf("collected %zu trajectories (%zu train / %zu eval) -> %s\n", trajs.size(),
              train.size(), eval.size(), out.string().c_str());
  return kExitOk;
}

int cmd_fit(const CommonArgs& args, const std::string& data_dir) {
  const SnapshotDataset ds = load_dataset(data_dir);
  const FitResult res = fit(ds);
  std::filesystem::path out(args.out);
  if (out.extension() != ".json") out /= "predictor.json";
  res.predictor.save(out);
  std::printf("fit: N=%d p=%d snapshots=%ld rank=%d/%d residual=%.6g -> %s\n",
              res.predictor.lifted_dim(), res.predictor.input_dim(),
              static_cast<long>(ds.size()), res.report.rank, res.report.regressor_rows,
              res.report.residual_fro, out.string().c_str());
  return kExitOk;
}

int cmd_eval(const CommonArgs& args, const std::string& predictor_path,
             const std::string& data_dir) {
  const ExperimentConfig cfg = load_config(args);
  const LiftedLinearPredictor pred = LiftedLinearPredictor::load(predictor_path);
  const std::filesystem::path data(data_dir);
  const SnapshotDataset ds =
      load_dataset(std::filesystem::exists(data / "eval") ? data / "eval" : data);
  const auto traj_file = data / "eval_trajectories.csv";
  if (!std::filesystem::exists(traj_file)) {
    throw ConfigError("eval: " + traj_file.string() +
                      " not found (produced by `liftkit collect`)");
  }
  const auto trajs = read_trajectories_csv(traj_file);

  EvaluationOptions opts;
  opts.scaled = cfg.metric_scaled;
  opts.horizon =
      cfg.system == "robot" ? cfg.robot.metric_horizon : cfg.pendulum.metric_horizon;
  if (cfg.system == "robot") opts.state_mask = {0, 1, 2, 4};
  const EvaluationReport rep = evaluate(pred, ds, trajs, opts);

  std::filesystem::path out(args.out);
  if (out.extension() != ".json") out /= "evaluation.json";
  write_json(out, rep.to_json());
  if (args.format == "csv") {
    std::printf("%s\n%s\n", EvaluationReport::csv_header().c_str(),
                rep.csv_row("cli-eval", "predictor").c_str());
  } else {
    std::printf("%s\n", rep.to_json().dump(2).c_str());
  }
  return kExitOk;
}

int cmd_lqr(const CommonArgs& args, const std::string& predictor_path) {
  const ExperimentConfig cfg = load_config(args);
  const LiftedLinearPredictor pred = LiftedLinearPredictor::load(predictor_path);
  const int n = pred.state_dim();
  const std::vector<double>& qx_diag =
      cfg.system == "robot" ? cfg.robot.mpc_q : cfg.pendulum.lqr_qx;
  const std::vector<double>& r_diag =
      cfg.system == "robot" ? cfg.robot.mpc_r : cfg.pendulum.lqr_r;
  if (static_cast<int>(qx_diag.size()) != n) {
    throw ConfigError("lqr: weight dimension does not match the predictor");
  }
  Matrix qx = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) qx(i, i) = qx_diag[i];
  Matrix r = Matrix::Zero(r_diag.size(), r_diag.size());
  for (size_t i = 0; i < r_diag.size(); ++i) r(i, i) = r_diag[i];

  LqrSpec spec;
  spec.Q = lifted_state_cost(pred, qx);
  spec.R = r;
  const LqrController ctrl = lqr_gain(pred, spec);

  std::filesystem::path out(args.out);
  if (out.extension() != ".json") out /= "lqr_gain.json";
  write_json(out, nlohmann::json{{"K", matrix_to_json(ctrl.K)},
                                 {"lifting", ctrl.map.to_json()},
                                 {"qx_diag", qx_diag},
                                 {"r_diag", r_diag}});
  std::printf("lqr gain (%ldx%ld) -> %s\n", static_cast<long>(ctrl.K.rows()),
              static_cast<long>(ctrl.K.cols()), out.string().c_str());
  return kExitOk;
}

int cmd_mpc(const CommonArgs& args, const std::string& predictor_path) {
  const ExperimentConfig cfg = load_config(args);
  const LiftedLinearPredictor pred = LiftedLinearPredictor::load(predictor_path);
  const ContinuousSystem sys = make_system(cfg);
  if (pred.state_dim() != sys.state_dim) {
    throw ConfigError("mpc: predictor state dimension does not match the system");
  }

  MpcSpec spec;
  if (cfg.system == "robot") {
    spec.horizon = cfg.robot.mpc_horizon;
    spec.Q = Matrix::Zero(6, 6);
    for (int i = 0; i < 6; ++i) spec.Q(i, i) = cfg.robot.mpc_q[i];
    spec.QN = cfg.robot.mpc_qn_scale * spec.Q;
    spec.R = Matrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i) spec.R(i, i) = cfg.robot.mpc_r[i];
    spec.u_min = Vector::Constant(2, -cfg.robot.input_bound);
    spec.u_max = Vector::Constant(2, cfg.robot.input_bound);
    spec.qp_tol = cfg.robot.qp_tol;
  } else {
    spec.horizon = cfg.pendulum.metric_horizon;
    spec.Q = Matrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i) spec.Q(i, i) = cfg.pendulum.lqr_qx[i];
    spec.QN = 10.0 * spec.Q;
    spec.R = Matrix::Constant(1, 1, cfg.pendulum.lqr_r[0]);
    spec.u_min = Vector::Constant(1, -1e9);
    spec.u_max = Vector::Constant(1, 1e9);
  }
  const MpcController mpc(pred, spec);

  Vector x0 = Vector::Zero(sys.state_dim);
  for (size_t i = 0; i < cfg.closed_loop.x0.size() && i < static_cast<size_t>(sys.state_dim);
       ++i) {
    x0(i) = cfg.closed_loop.x0[i];
  }
  ClosedLoopOptions opts;
  opts.duration_s = cfg.closed_loop.duration_s;
  opts.h = cfg.h;
  ReferenceFn ref;
  if (cfg.system == "robot" && cfg.closed_loop.demo_references) {
    const double amp_s = cfg.robot.demo_speed_amp;
    const double amp_y = cfg.robot.demo_yaw_amp;
    const double fs = cfg.robot.speed_ref_freq_hz;
    const double fy = cfg.robot.yaw_ref_freq_hz;
    ref = [amp_s, amp_y, fs, fy](double t) -> Vector {
      Vector r = Vector::Zero(6);
      r(0) = amp_s * std::sin(2.0 * 3.141592653589793 * fs * t);
      r(2) = amp_y * std::sin(2.0 * 3.141592653589793 * fy * t);
      return r;
    };
  }
  const ClosedLoopResult res = run_closed_loop(sys, mpc, x0, opts, ref);
  const std::filesystem::path out(args.out);
  std::filesystem::create_directories(out);
  write_text_atomic(out / "closed_loop.csv", closed_loop_csv(res));
  write_json(out / "closed_loop.json",
             nlohmann::json{{"failed", res.failed},
                            {"failure_time", res.failure_time},
                            {"failure_reason", res.failure_reason},
                            {"steps", res.trajectory.length()}});
  std::printf("closed loop: %s (%d steps) -> %s\n", res.failed ? "FAILED" : "ok",
              res.trajectory.length(), out.string().c_str());
  return res.failed ? kExitFailureFlag : kExitOk;
}

int cmd_experiment(const CommonArgs& args, const std::string& name) {
  const ExperimentConfig cfg = load_config(args);
  const ExperimentReport report = run_experiment(name, cfg, args.out);
  if (args.format == "csv") {
    std::printf("experiment,expectations_met\n%s,%d\n", report.name.c_str(),
                report.expectations_met ? 1 : 0);
  } else {
    std::printf("%s\n",
                nlohmann::json{{"experiment", report.name},
                               {"expectations_met", report.expectations_met},
                               {"details", report.details}}
                    .dump(2)
                    .c_str());
  }
  return report.expectations_met ? kExitOk : kExitFailureFlag;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"liftkit: lifted linear predictors for control"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string data_dir;
  std::string predictor_path;
  std::string experiment_name;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "JSON configuration file");
    cmd->add_option("--seed", args.seed, "master seed override");
    cmd->add_option("--out", args.out, "output file or directory");
    cmd->add_option("--format", args.format, "stdout format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
  };

  CLI::App* collect_cmd =
      app.add_subcommand("collect", "generate identification/validation datasets");
  add_common(collect_cmd);

  CLI::App* fit_cmd = app.add_subcommand("fit", "EDMD fit on a collected dataset");
  fit_cmd->add_option("--data", data_dir, "dataset directory (train split)")->required();
  add_common(fit_cmd);

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a predictor on a dataset");
  eval_cmd->add_option("--predictor", predictor_path, "predictor JSON")->required();
  eval_cmd->add_option("--data", data_dir, "dataset directory from `collect`")->required();
  add_common(eval_cmd);

  CLI::App* lqr_cmd = app.add_subcommand("lqr", "synthesize an LQR gain for a predictor");
  lqr_cmd->add_option("--predictor", predictor_path, "predictor JSON")->required();
  add_common(lqr_cmd);

  CLI::App* mpc_cmd = app.add_subcommand("mpc", "run a closed-loop MPC simulation");
  mpc_cmd->add_option("--predictor", predictor_path, "predictor JSON")->required();
  add_common(mpc_cmd);

  CLI::App* exp_cmd = app.add_subcommand("experiment", "run a named experiment");
  exp_cmd->add_option("name", experiment_name, "experiment name")
      ->required()
      ->check(CLI::IsMember(liftkit::experiment_names()));
  add_common(exp_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    if (collect_cmd->parsed()) return cmd_collect(args);
    if (fit_cmd->parsed()) return cmd_fit(args, data_dir);
    if (eval_cmd->parsed()) return cmd_eval(args, predictor_path, data_dir);
    if (lqr_cmd->parsed()) return cmd_lqr(args, predictor_path);
    if (mpc_cmd->parsed()) return cmd_mpc(args, predictor_path);
    if (exp_cmd->parsed()) return cmd_experiment(args, experiment_name);
  } catch (const liftkit::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const liftkit::NumericsError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerics;
  } catch (const liftkit::DivergenceError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerics;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
