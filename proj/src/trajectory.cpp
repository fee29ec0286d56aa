#include "delvar/trajectory.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace delvar {

Grid make_grid(double t1, double t2, double tau, double h) {
  if (!(h > 0.0)) throw ValidationError("grid step must be positive");
  double k_real = tau / h;
  double m_real = (t2 - t1) / h;
  double k_round = std::round(k_real);
  double m_round = std::round(m_real);
  if (std::fabs(k_real - k_round) > 1e-12 * std::max(1.0, k_real)) {
    throw ValidationError("non-commensurate step: tau/h is not an integer");
  }
  if (std::fabs(m_real - m_round) > 1e-12 * std::max(1.0, m_real)) {
    throw ValidationError("non-commensurate step: (t2 - t1)/h is not an integer");
  }
  Grid g;
  g.h = h;
  g.k = static_cast<int>(k_round);
  g.steps = static_cast<int>(m_round);
  g.last = g.k + g.steps;
  if (g.k < 2) throw ValidationError("tau must span at least two grid steps (k >= 2)");
  if (g.steps < 1) throw ValidationError("horizon must span at least one grid step");
  return g;
}

void Trajectory::enable_controls(int m_dim) {
  m = m_dim;
  has_controls = true;
  controls.assign(static_cast<std::size_t>(nodes()) * m, 0.0);
}

void Trajectory::enable_costates() {
  has_costates = true;
  costates.assign(static_cast<std::size_t>(nodes()) * n, std::numeric_limits<double>::quiet_NaN());
}

namespace {

Trajectory grid_trajectory(double t1, double t2, double tau, double h, int n, const Prehistory& pre) {
  Grid g = make_grid(t1, t2, tau, h);
  Trajectory traj;
  traj.h = h;
  traj.n = n;
  traj.times.resize(static_cast<std::size_t>(g.last) + 1);
  traj.states.assign((static_cast<std::size_t>(g.last) + 1) * n, 0.0);
  for (int j = 0; j <= g.last; ++j) {
    traj.times[static_cast<std::size_t>(j)] = t1 + (j - g.k) * h;
  }
  for (int j = 0; j <= g.k; ++j) {
    std::vector<double> v = prehistory_eval(pre, traj.times[static_cast<std::size_t>(j)]);
    for (int c = 1; c <= n; ++c) traj.state(j, c) = v[static_cast<std::size_t>(c) - 1];
  }
  return traj;
}

}  // namespace

Trajectory make_trajectory(const DelayedVariationalProblem& p, double h) {
  return grid_trajectory(p.t1, p.t2, p.tau, h, p.n, p.prehistory);
}

Trajectory make_trajectory(const OptimalControlDelayProblem& p, double h) {
  Trajectory traj = grid_trajectory(p.t1, p.t2, p.tau, h, p.n, p.prehistory);
  traj.enable_controls(p.m);
  traj.enable_costates();
  return traj;
}

Grid align_grid(double t1, double t2, double tau, const Trajectory& traj) {
  if (traj.nodes() < 3) throw ValidationError("trajectory needs at least three nodes");
  Grid g = make_grid(t1, t2, tau, traj.h);
  if (g.last + 1 != traj.nodes()) {
    throw ValidationError("trajectory node count does not match the problem grid");
  }
  for (int j = 0; j <= g.last; ++j) {
    double expected = t1 + (j - g.k) * traj.h;
    if (std::fabs(traj.times[static_cast<std::size_t>(j)] - expected) > 1e-9 * std::max(1.0, std::fabs(expected))) {
      throw ValidationError("trajectory grid is not uniform over [t1 - tau, t2]");
    }
  }
  return g;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "t";
  for (int c = 1; c <= traj.n; ++c) out << ",q" << c;
  if (traj.has_controls) {
    for (int c = 1; c <= traj.m; ++c) out << ",u" << c;
  }
  if (traj.has_costates) {
    for (int c = 1; c <= traj.n; ++c) out << ",p" << c;
  }
  out << "\n";
  char buf[40];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (int j = 0; j < traj.nodes(); ++j) {
    emit(traj.times[static_cast<std::size_t>(j)]);
    for (int c = 1; c <= traj.n; ++c) {
      out << ",";
      emit(traj.state(j, c));
    }
    if (traj.has_controls) {
      for (int c = 1; c <= traj.m; ++c) {
        out << ",";
        emit(traj.control(j, c));
      }
    }
    if (traj.has_costates) {
      for (int c = 1; c <= traj.n; ++c) {
        out << ",";
        emit(traj.costate(j, c));
      }
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw IoError("'" + path + "' is empty");
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "t") throw IoError("'" + path + "': header must start with 't'");

  int n = 0, m = 0, np = 0;
  std::size_t idx = 1;
  while (idx < header.size() && header[idx] == "q" + std::to_string(n + 1)) {
    ++n;
    ++idx;
  }
  while (idx < header.size() && header[idx] == "u" + std::to_string(m + 1)) {
    ++m;
    ++idx;
  }
  while (idx < header.size() && header[idx] == "p" + std::to_string(np + 1)) {
    ++np;
    ++idx;
  }
  if (idx != header.size() || n == 0 || (np != 0 && np != n)) {
    throw IoError("'" + path + "': header must be t,q1..qn[,u1..um][,p1..pn]");
  }

  Trajectory traj;
  traj.n = n;
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw IoError("'" + path + "' line " + std::to_string(line_no) + ": wrong number of columns");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        throw IoError("'" + path + "' line " + std::to_string(line_no) + ": malformed number '" + cell + "'");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 3) throw IoError("'" + path + "': need at least three rows");

  int nodes = static_cast<int>(rows.size());
  traj.times.resize(static_cast<std::size_t>(nodes));
  traj.states.assign(static_cast<std::size_t>(nodes) * n, 0.0);
  if (m > 0) traj.enable_controls(m);
  if (np > 0) traj.enable_costates();
  for (int j = 0; j < nodes; ++j) {
    const auto& row = rows[static_cast<std::size_t>(j)];
    traj.times[static_cast<std::size_t>(j)] = row[0];
    for (int c = 1; c <= n; ++c) traj.state(j, c) = row[static_cast<std::size_t>(c)];
    for (int c = 1; c <= m; ++c) traj.control(j, c) = row[static_cast<std::size_t>(n + c)];
    for (int c = 1; c <= np; ++c) traj.costate(j, c) = row[static_cast<std::size_t>(n + m + c)];
  }
  traj.h = (traj.times.back() - traj.times.front()) / (nodes - 1);
  for (int j = 1; j < nodes; ++j) {
    double step = traj.times[static_cast<std::size_t>(j)] - traj.times[static_cast<std::size_t>(j) - 1];
    if (std::fabs(step - traj.h) > 1e-9 * std::max(1.0, std::fabs(traj.h))) {
      throw IoError("'" + path + "': grid spacing is not uniform");
    }
  }
  return traj;
}

}  // namespace delvar
