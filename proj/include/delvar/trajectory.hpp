#pragma once

#include <string>
#include <vector>

#include "delvar/problem.hpp"

namespace delvar {

/// Delay-commensurate uniform grid over [t1 - tau, t2]: tau = k*h with
/// integer k >= 2 and t2 - t1 = steps*h with integer steps. Node j sits at
/// t1 + (j - k)*h; node k is t1, node last is t2.
struct Grid {
  double h = 0.0;
  int k = 0;      // delay in steps
  int steps = 0;  // horizon in steps
  int last = 0;   // k + steps
};

/// Throws ValidationError when h is not commensurate (tau/h or (t2-t1)/h off
/// an integer by more than 1e-12 relative, or k < 2).
Grid make_grid(double t1, double t2, double tau, double h);

/// Uniform time grid with node values for the states and, for control
/// problems, controls and costates. Costates are meaningful on [t1, t2] only
/// and hold NaN elsewhere.
struct Trajectory {
  std::vector<double> times;
  double h = 0.0;
  int n = 0;
  int m = 0;
  bool has_controls = false;
  bool has_costates = false;
  std::vector<double> states;    // nodes x n, row-major
  std::vector<double> controls;  // nodes x m
  std::vector<double> costates;  // nodes x n

  int nodes() const { return static_cast<int>(times.size()); }

  double state(int node, int comp) const { return states[static_cast<std::size_t>(node) * n + comp - 1]; }
  double& state(int node, int comp) { return states[static_cast<std::size_t>(node) * n + comp - 1]; }
  double control(int node, int comp) const { return controls[static_cast<std::size_t>(node) * m + comp - 1]; }
  double& control(int node, int comp) { return controls[static_cast<std::size_t>(node) * m + comp - 1]; }
  double costate(int node, int comp) const { return costates[static_cast<std::size_t>(node) * n + comp - 1]; }
  double& costate(int node, int comp) { return costates[static_cast<std::size_t>(node) * n + comp - 1]; }

  void enable_controls(int m_dim);
  void enable_costates();
};

/// Fresh trajectory on the problem's grid with prehistory nodes filled from
/// delta and everything else zero. Rejects non-commensurate h.
Trajectory make_trajectory(const DelayedVariationalProblem& p, double h);
Trajectory make_trajectory(const OptimalControlDelayProblem& p, double h);

/// Pair an existing trajectory with a problem: checks dimensions, uniform
/// spacing, and that t1, t2 and the delay all land on grid nodes.
Grid align_grid(double t1, double t2, double tau, const Trajectory& traj);

/// CSV exchange format: header `t,q1,...,qn[,u1,...,um][,p1,...,pn]`, one row
/// per node, 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace delvar
