#pragma once

#include "liftkit/config.hpp"
#include "liftkit/control.hpp"
#include "liftkit/datagen.hpp"
#include "liftkit/edmd.hpp"
#include "liftkit/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace liftkit {

struct ExperimentReport {
  std::string name;
  bool expectations_met = false;
  nlohmann::json details;
};

/// Swing-up identification + LQR comparison between the sine-map LLP and
/// the local predictor, both driven from the downward position.
ExperimentReport run_pendulum_baseline(const ExperimentConfig& cfg,
                                       const std::filesystem::path& out_dir);

/// Open-loop data collection under the three initial-state schemes; only
/// near-stable initialization is expected to yield a working swing-up.
ExperimentReport run_pendulum_pathology_data(const ExperimentConfig& cfg,
                                             const std::filesystem::path& out_dir);

/// Dictionary comparison (local / sine / TPS / polynomial / Gaussian) with
/// the three metrics and the resulting closed loops.
ExperimentReport run_pendulum_pathology_lifting(const ExperimentConfig& cfg,
                                                const std::filesystem::path& out_dir);

/// Robot MPC with the velocity-space dictionary against the local
/// predictor, including the prediction-error improvement figure.
ExperimentReport run_robot_baseline(const ExperimentConfig& cfg,
                                    const std::filesystem::path& out_dir);

/// Full-state dictionary refit demonstrating non-physical coupling: runs
/// from s0 = 0 and s0 = 100, plus |A| heatmap data for both predictors.
ExperimentReport run_robot_pathology_coupling(const ExperimentConfig& cfg,
                                              const std::filesystem::path& out_dir);

/// Dispatch by experiment name (pendulum-baseline, pendulum-pathology-data,
/// pendulum-pathology-lifting, robot-baseline, robot-pathology-coupling).
ExperimentReport run_experiment(const std::string& name, const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir);

std::vector<std::string> experiment_names();

/// Pendulum swing-up criterion: the state norm stays below tol over the
/// final window of the run and the loop never diverged.
bool swingup_success(const ClosedLoopResult& result, double tol, double window_s);

/// Robot failure criterion: fallen (|phi| beyond fall_angle) or diverged.
bool robot_run_failed(const ClosedLoopResult& result, double fall_angle);

/// Config echo plus a content hash per output file.
void write_manifest(const std::filesystem::path& out_dir, const std::string& name,
                    const ExperimentConfig& cfg);

}  // namespace liftkit
