#include "liftkit/datagen.hpp"

#include "liftkit/io.hpp"
#include "liftkit/rng.hpp"

#include <cmath>
#include <numeric>

namespace liftkit {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kDivergenceNorm = 1e6;
constexpr int kMaxRedraws = 10;

}  // namespace

int ExcitationSpec::steps() const {
  const double exact = length_s / h;
  const int n = static_cast<int>(std::lround(exact));
  if (n < 1 || std::abs(exact - n) > 1e-9) {
    throw ConfigError("ExcitationSpec: length_s must be a positive multiple of h");
  }
  return n;
}

void ExcitationSpec::validate(const ContinuousSystem& sys) const {
  if (count <= 0) throw ConfigError("ExcitationSpec: count must be positive");
  (void)steps();
  if (perturb_hold_steps < 1) {
    throw ConfigError("ExcitationSpec: perturb_hold_steps must be >= 1");
  }
  if (mode == ExcitationMode::LqrFeedback) {
    if (lqr_gain.rows() != sys.input_dim || lqr_gain.cols() != sys.state_dim) {
      throw ConfigError("ExcitationSpec: lqr_gain must be input_dim x state_dim");
    }
  }
  if (init_scheme == InitScheme::Box) {
    if (init_low.size() != sys.state_dim || init_high.size() != sys.state_dim) {
      throw ConfigError("ExcitationSpec: Box init bounds must match state_dim");
    }
  } else if (sys.state_dim != 2) {
    throw ConfigError("ExcitationSpec: named init schemes are for the 2-state pendulum");
  }
}

Vector initial_state_sampler(InitScheme scheme, std::uint64_t seed) {
  Rng rng(seed);
  Vector x(2);
  switch (scheme) {
    case InitScheme::NearStable:
      x(0) = kPi + rng.uniform(-0.3, 0.3);
      break;
    case InitScheme::NearUnstable:
      x(0) = rng.uniform(-0.3, 0.3);
      break;
    case InitScheme::UniformAngle:
      x(0) = rng.uniform(-kPi, kPi);
      break;
    case InitScheme::Box:
      throw std::invalid_argument("initial_state_sampler: Box scheme needs explicit bounds");
  }
  x(1) = rng.uniform(-1.0, 1.0);
  return x;
}

namespace {

Vector draw_initial_state(const ExcitationSpec& spec, Rng& rng) {
  if (spec.init_scheme == InitScheme::Box) {
    Vector x(spec.init_low.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x(i) = rng.uniform(spec.init_low(i), spec.init_high(i));
    }
    return x;
  }
  Vector x(2);
  switch (spec.init_scheme) {
    case InitScheme::NearStable:
      x(0) = kPi + rng.uniform(-0.3, 0.3);
      break;
    case InitScheme::NearUnstable:
      x(0) = rng.uniform(-0.3, 0.3);
      break;
    default:
      x(0) = rng.uniform(-kPi, kPi);
      break;
  }
  x(1) = rng.uniform(-1.0, 1.0);
  return x;
}

/// One attempt at a single trajectory; throws DivergenceError on blowup.
Trajectory roll_one(const ContinuousSystem& sys, const ExcitationSpec& spec, Rng& rng) {
  const int L = spec.steps();
  const int p = sys.input_dim;

  // Draw order is fixed: initial state, feedback gain, reference
  // amplitudes, then the perturbation path as the rollout consumes it.
  const Vector x0 = draw_initial_state(spec, rng);
  double kp = 0.0;
  if (spec.mode == ExcitationMode::ProportionalFeedback) {
    kp = rng.uniform(spec.kp_min, spec.kp_max);
  }
  std::vector<double> ref_amp;
  if (spec.mode == ExcitationMode::LqrFeedback) {
    for (const ReferenceChannel& ch : spec.reference_channels) {
      ref_amp.push_back(rng.uniform(ch.amp_min, ch.amp_max));
    }
  }

  Trajectory t;
  t.h = spec.h;
  t.states.resize(sys.state_dim, L + 1);
  t.inputs.resize(p, L);
  t.states.col(0) = x0;

  Vector perturb = Vector::Zero(p);
  for (int k = 0; k < L; ++k) {
    if (k % spec.perturb_hold_steps == 0) {
      for (int i = 0; i < p; ++i) {
        perturb(i) = rng.uniform(-spec.perturb_amplitude, spec.perturb_amplitude);
      }
    }
    const Vector x = t.states.col(k);
    Vector u = perturb;
    if (spec.mode == ExcitationMode::ProportionalFeedback) {
      u(0) -= kp * x(spec.feedback_state);
    } else if (spec.mode == ExcitationMode::LqrFeedback) {
      Vector x_ref = Vector::Zero(sys.state_dim);
      const double time = k * spec.h;
      for (size_t c = 0; c < spec.reference_channels.size(); ++c) {
        const ReferenceChannel& ch = spec.reference_channels[c];
        x_ref(ch.state_index) = ref_amp[c] * std::sin(2.0 * kPi * ch.freq_hz * time);
      }
      u -= spec.lqr_gain * (x - x_ref);
    }
    t.inputs.col(k) = u;
    const Vector next = rk4_step(sys, x, u, spec.h);
    if (next.norm() > kDivergenceNorm) {
      throw DivergenceError(sys.name + ": collected trajectory diverged", k);
    }
    t.states.col(k + 1) = next;
  }
  return t;
}

}  // namespace

std::vector<Trajectory> collect(const ContinuousSystem& sys, const ExcitationSpec& spec) {
  spec.validate(sys);
  std::vector<Trajectory> out;
  out.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    const std::uint64_t traj_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(i));
    bool done = false;
    for (int attempt = 0; attempt <= kMaxRedraws && !done; ++attempt) {
      Rng rng(derive_seed(traj_seed, static_cast<std::uint64_t>(attempt)));
      try {
        out.push_back(roll_one(sys, spec, rng));
        done = true;
      } catch (const DivergenceError&) {
        // redraw
      }
    }
    if (!done) {
      throw DivergenceError(
          sys.name + ": trajectory " + std::to_string(i) + " diverged after " +
              std::to_string(kMaxRedraws) + " redraws",
          i);
    }
  }
  return out;
}

SnapshotDataset assemble(const std::vector<Trajectory>& trajs, const LiftingMap& map) {
  if (trajs.empty()) throw std::invalid_argument("assemble: no trajectories");
  const int n = trajs[0].state_dim();
  const int p = trajs[0].input_dim();
  Eigen::Index total = 0;
  for (const Trajectory& t : trajs) {
    if (t.state_dim() != n || t.input_dim() != p || t.h != trajs[0].h) {
      throw std::invalid_argument("assemble: trajectories disagree on dims or step");
    }
    total += t.length();
  }
  if (map.state_dim() != n) {
    throw std::invalid_argument("assemble: map state dimension mismatch");
  }

  SnapshotDataset ds;
  ds.map = map;
  ds.h = trajs[0].h;
  ds.X.resize(n, total);
  ds.X_lift.resize(map.lifted_dim(), total);
  ds.Y_lift.resize(map.lifted_dim(), total);
  ds.U.resize(p, total);
  Eigen::Index col = 0;
  for (const Trajectory& t : trajs) {
    for (int k = 0; k < t.length(); ++k, ++col) {
      ds.X.col(col) = t.states.col(k);
      ds.U.col(col) = t.inputs.col(k);
      ds.X_lift.col(col) = map.lift(t.states.col(k));
      ds.Y_lift.col(col) = map.lift(t.states.col(k + 1));
    }
  }
  return ds;
}

std::pair<std::vector<Trajectory>, std::vector<Trajectory>> split(
    const std::vector<Trajectory>& trajs, int eval_count, std::uint64_t seed) {
  if (eval_count < 0 || static_cast<size_t>(eval_count) >= trajs.size()) {
    throw std::invalid_argument("split: eval_count must be in [0, total)");
  }
  std::vector<size_t> idx(trajs.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.below(i)]);
  }
  std::vector<Trajectory> train, eval;
  const size_t train_count = trajs.size() - static_cast<size_t>(eval_count);
  for (size_t i = 0; i < idx.size(); ++i) {
    (i < train_count ? train : eval).push_back(trajs[idx[i]]);
  }
  return {std::move(train), std::move(eval)};
}

void save_dataset(const std::filesystem::path& dir, const SnapshotDataset& ds,
                  const nlohmann::json& extra_meta) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta{
      {"state_dim", ds.X.rows()},
      {"input_dim", ds.U.rows()},
      {"lifted_dim", ds.X_lift.rows()},
      {"snapshot_count", ds.size()},
      {"sample_time", ds.h},
      {"layout", "CSV rows are snapshots; in-memory matrices are column-per-snapshot"},
      {"lifting", ds.map.to_json()}};
  if (!extra_meta.is_null() && !extra_meta.empty()) meta["spec"] = extra_meta;
  write_json(dir / "meta.json", meta);
  write_matrix_csv(dir / "X.csv", ds.X.transpose());
  write_matrix_csv(dir / "Xlift.csv", ds.X_lift.transpose());
  write_matrix_csv(dir / "Ylift.csv", ds.Y_lift.transpose());
  write_matrix_csv(dir / "U.csv", ds.U.transpose());
}

SnapshotDataset load_dataset(const std::filesystem::path& dir) {
  const nlohmann::json meta = read_json(dir / "meta.json");
  SnapshotDataset ds;
  ds.map = LiftingMap::from_json(meta.at("lifting"));
  ds.h = meta.value("sample_time", 0.01);
  ds.X = read_matrix_csv(dir / "X.csv").transpose();
  ds.X_lift = read_matrix_csv(dir / "Xlift.csv").transpose();
  ds.Y_lift = read_matrix_csv(dir / "Ylift.csv").transpose();
  ds.U = read_matrix_csv(dir / "U.csv").transpose();
  return ds;
}

}  // namespace liftkit
