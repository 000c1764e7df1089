#include "liftkit/io.hpp"

#include "liftkit/rng.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace liftkit {

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  return nlohmann::json::parse(read_text(path));
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header) {
  std::string out;
  if (!header.empty()) {
    for (size_t i = 0; i < header.size(); ++i) {
      if (i) out += ',';
      out += header[i];
    }
    out += '\n';
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

Matrix read_matrix_csv(const std::filesystem::path& path, bool has_header) {
  std::istringstream in(read_text(path));
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && has_header) {
      first = false;
      continue;
    }
    first = false;
    std::vector<double> row;
    for (const std::string& f : split_line(line)) {
      row.push_back(f.empty() ? std::numeric_limits<double>::quiet_NaN()
                              : std::strtod(f.c_str(), nullptr));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(rows.size(), rows[0].size());
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) {
      throw std::runtime_error("ragged CSV: " + path.string());
    }
    for (size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

namespace {

std::string trajectory_header(int n, int p, bool with_id) {
  std::string h = with_id ? "traj,t" : "t";
  for (int i = 1; i <= n; ++i) h += ",x" + std::to_string(i);
  for (int i = 1; i <= p; ++i) h += ",u" + std::to_string(i);
  return h;
}

void append_trajectory_rows(std::string& out, const Trajectory& t, int id, bool with_id) {
  const int n = t.state_dim();
  const int p = t.input_dim();
  for (int k = 0; k <= t.length(); ++k) {
    if (with_id) {
      out += std::to_string(id);
      out += ',';
    }
    out += format_double(k * t.h);
    for (int i = 0; i < n; ++i) {
      out += ',';
      out += format_double(t.states(i, k));
    }
    for (int i = 0; i < p; ++i) {
      out += ',';
      if (k < t.length()) out += format_double(t.inputs(i, k));
    }
    out += '\n';
  }
}

}  // namespace

std::string trajectory_csv(const Trajectory& t) {
  std::string out = trajectory_header(t.state_dim(), t.input_dim(), false) + "\n";
  append_trajectory_rows(out, t, 0, false);
  return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& t) {
  write_text_atomic(path, trajectory_csv(t));
}

namespace {

Trajectory trajectory_from_rows(const Matrix& rows, int n, int p) {
  Trajectory t;
  const Eigen::Index steps = rows.rows();
  if (steps < 2) throw std::runtime_error("trajectory CSV needs at least two rows");
  t.h = rows(1, 0) - rows(0, 0);
  t.states.resize(n, steps);
  t.inputs.resize(p, steps - 1);
  for (Eigen::Index k = 0; k < steps; ++k) {
    for (int i = 0; i < n; ++i) t.states(i, k) = rows(k, 1 + i);
    if (k < steps - 1) {
      for (int i = 0; i < p; ++i) t.inputs(i, k) = rows(k, 1 + n + i);
    }
  }
  return t;
}

std::pair<int, int> dims_from_header(const std::string& header_line, bool with_id) {
  int n = 0, p = 0;
  for (const std::string& f : split_line(header_line)) {
    if (f.size() >= 2 && f[0] == 'x') n = std::max(n, std::atoi(f.c_str() + 1));
    if (f.size() >= 2 && f[0] == 'u') p = std::max(p, std::atoi(f.c_str() + 1));
  }
  (void)with_id;
  return {n, p};
}

}  // namespace

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const auto eol = text.find('\n');
  if (eol == std::string::npos) throw std::runtime_error("empty trajectory CSV");
  const auto [n, p] = dims_from_header(text.substr(0, eol), false);
  const Matrix rows = read_matrix_csv(path, true);
  return trajectory_from_rows(rows, n, p);
}

void write_trajectories_csv(const std::filesystem::path& path,
                            const std::vector<Trajectory>& trajs) {
  if (trajs.empty()) throw std::invalid_argument("write_trajectories_csv: no trajectories");
  std::string out =
      trajectory_header(trajs[0].state_dim(), trajs[0].input_dim(), true) + "\n";
  for (size_t i = 0; i < trajs.size(); ++i) {
    append_trajectory_rows(out, trajs[i], static_cast<int>(i), true);
  }
  write_text_atomic(path, out);
}

std::vector<Trajectory> read_trajectories_csv(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const auto eol = text.find('\n');
  if (eol == std::string::npos) throw std::runtime_error("empty trajectories CSV");
  const auto [n, p] = dims_from_header(text.substr(0, eol), true);
  const Matrix all = read_matrix_csv(path, true);
  std::vector<Trajectory> out;
  Eigen::Index start = 0;
  for (Eigen::Index r = 1; r <= all.rows(); ++r) {
    if (r == all.rows() || all(r, 0) != all(start, 0)) {
      out.push_back(trajectory_from_rows(
          all.block(start, 1, r - start, all.cols() - 1), n, p));
      start = r;
    }
  }
  return out;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  return fnv1a64(read_text(path));
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  Matrix m(rows, cols);
  const auto& data = j.at("data");
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data.at(r).at(c).get<double>();
  }
  return m;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from_json(const nlohmann::json& j) {
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
  return v;
}

}  // namespace liftkit
