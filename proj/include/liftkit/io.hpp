#pragma once

#include "liftkit/trajectory.hpp"
#include "liftkit/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace liftkit {

/// Shortest decimal form that round-trips the double exactly.
std::string format_double(double v);

/// Writes to a temporary sibling and renames over the target.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

std::string read_text(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Plain numeric CSV, one matrix row per line. An optional header row is
/// written verbatim when non-empty.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header = {});
Matrix read_matrix_csv(const std::filesystem::path& path, bool has_header = false);

/// Trajectory CSV: header `t,x1..xn,u1..up`, one row per step; the input
/// columns of the terminal row are empty.
std::string trajectory_csv(const Trajectory& t);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& t);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Multiple trajectories in one file with a leading `traj` id column.
void write_trajectories_csv(const std::filesystem::path& path,
                            const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_trajectories_csv(const std::filesystem::path& path);

std::uint64_t fnv1a64_file(const std::filesystem::path& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

}  // namespace liftkit
