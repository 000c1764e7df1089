#pragma once

#include "liftkit/dynamics.hpp"
#include "liftkit/lifting.hpp"
#include "liftkit/trajectory.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace liftkit {

enum class ExcitationMode { ProportionalFeedback, LqrFeedback, OpenLoopRandom };
enum class InitScheme { NearStable, NearUnstable, UniformAngle, Box };

/// Sinusoidal reference on one state channel; the amplitude is redrawn per
/// trajectory.
struct ReferenceChannel {
  int state_index = 0;
  double freq_hz = 0.5;
  double amp_min = 0.0;
  double amp_max = 1.0;
};

struct ExcitationSpec {
  ExcitationMode mode = ExcitationMode::ProportionalFeedback;
  int count = 2100;
  double length_s = 0.5;
  double h = 0.01;

  // ProportionalFeedback: u = -kp * x[feedback_state], kp ~ U(kp_min, kp_max).
  int feedback_state = 0;
  double kp_min = 10.0;
  double kp_max = 200.0;

  // LqrFeedback: u = -K (x - x_ref(t)) with x_ref built from the channels.
  Matrix lqr_gain;   // p x n
  std::vector<ReferenceChannel> reference_channels;

  // Zero-order-hold perturbation added to the input in every mode;
  // amplitudes are redrawn every perturb_hold_steps steps.
  double perturb_amplitude = 2.0;
  int perturb_hold_steps = 5;

  InitScheme init_scheme = InitScheme::UniformAngle;
  Vector init_low;    // Box scheme bounds
  Vector init_high;

  std::uint64_t seed = 0;

  int steps() const;
  void validate(const ContinuousSystem& sys) const;
};

/// Draws an initial pendulum state (phi0, omega0) for one of the three
/// named schemes; omega0 ~ U(-1, 1) in all of them.
Vector initial_state_sampler(InitScheme scheme, std::uint64_t seed);

/// Generates spec.count closed- or open-loop trajectories. Each trajectory
/// owns an independent stream derived from (spec.seed, index), so results
/// do not depend on evaluation order. Divergent trajectories are redrawn,
/// up to 10 redraws each.
std::vector<Trajectory> collect(const ContinuousSystem& sys, const ExcitationSpec& spec);

/// Column-stacked EDMD data. Column j holds one snapshot pair:
/// X_lift[:,j] = Psi(X[:,j]) and Y_lift[:,j] = Psi of its one-step
/// successor under U[:,j].
struct SnapshotDataset {
  Matrix X;        // n x N_d
  Matrix X_lift;   // N x N_d
  Matrix Y_lift;   // N x N_d
  Matrix U;        // p x N_d
  LiftingMap map;
  double h = 0.01;   // sampling period of the snapshot relation

  Eigen::Index size() const { return X.cols(); }
};

SnapshotDataset assemble(const std::vector<Trajectory>& trajs, const LiftingMap& map);

/// Deterministic shuffled split into (train, eval).
std::pair<std::vector<Trajectory>, std::vector<Trajectory>> split(
    const std::vector<Trajectory>& trajs, int eval_count, std::uint64_t seed);

/// Dataset directory layout: meta.json plus X.csv, Xlift.csv, Ylift.csv,
/// U.csv. CSV rows are snapshots (the in-memory column-per-snapshot layout
/// transposed); meta.json records this.
void save_dataset(const std::filesystem::path& dir, const SnapshotDataset& ds,
                  const nlohmann::json& extra_meta = {});
SnapshotDataset load_dataset(const std::filesystem::path& dir);

}  // namespace liftkit
