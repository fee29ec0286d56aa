#pragma once

#include "delvar/conditions.hpp"
#include "delvar/solver.hpp"
#include "delvar/trajectory.hpp"

namespace delvar {

/// Everything node binding needs to read a trajectory against a problem:
/// prehistory for exact delta values/derivatives below t1, grid alignment,
/// and the corner set. Corners are the grid nodes where extremals may lose
/// smoothness: delay multiples t1 + j*tau and prehistory piece junctions
/// translated by multiples of tau. Statistics that assume smoothness skip a
/// one-stencil neighbourhood of them; raw per-node profiles and `max_abs`
/// fields always keep every evaluable node.
struct VerifyContext {
  const Prehistory* prehistory = nullptr;
  int n = 0;
  int m = 0;
  double t1 = 0.0, t2 = 0.0, tau = 0.0;
  Grid grid;
  std::vector<int> corners;  // sorted node indices
};

VerifyContext make_context(const DelayedVariationalProblem& p, const Trajectory& traj);
VerifyContext make_context(const OptimalControlDelayProblem& p, const Trajectory& traj);

/// Values for the requested symbols at a node: grid values for states
/// (exact delta on prehistory nodes), central differences for first and
/// second derivatives (analytic delta derivatives strictly below t1), data
/// columns for controls and costates, central differences of p for dp.
/// Throws BindError when a requested offset leaves the grid or reads an
/// undefined column.
Binding bind_node(const VerifyContext& ctx, const Trajectory& traj, int node, const std::vector<Symbol>& needs);

/// True when any stencil the expression reads at this node sits within
/// `radius` nodes of a corner.
bool corner_affected(const VerifyContext& ctx, int node, const std::vector<int>& offsets, int radius = 1);

struct SegmentDrift {
  int first_node = 0, last_node = 0;
  int used = 0;
  double mean = 0.0;
  double max_abs_dev = 0.0;
  double rel_drift = 0.0;  // max_abs_dev / max(1, |mean|)
};

struct ChargeSample {
  int node = 0;
  double t = 0.0;
  double value = 0.0;
};

struct IntervalDrift {
  std::string piece;                  // "inner", "outer" or "full"
  int first_node = 0, last_node = 0;  // requested node range
  std::vector<ChargeSample> profile;  // every evaluable node, corners included
  std::vector<SegmentDrift> segments; // smooth segments between corners
  double rel_drift = 0.0;             // max over segments
};

struct DriftReport {
  std::vector<IntervalDrift> intervals;
  double rel_drift = 0.0;  // max over intervals
};

/// Charge values along the trajectory per validity interval, with
/// per-smooth-segment constancy statistics. The junction node t2 - tau is
/// evaluated under both pieces. Binding failures shrink the evaluable range.
DriftReport charge_drift(const DelayedVariationalProblem& p, const Trajectory& traj, const PiecewiseCharge& charge);
DriftReport charge_drift(const OptimalControlDelayProblem& p, const Trajectory& traj, const Expr& charge);

struct ResidualStats {
  std::string label;
  int used = 0;
  double max_abs = 0.0;         // over all evaluable interior nodes
  int argmax = -1;
  double max_abs_smooth = 0.0;  // corner-stencil neighbourhoods excluded
  int argmax_smooth = -1;
};

struct ResidualReport {
  std::vector<ResidualStats> entries;
  double max_abs = 0.0;
  double max_abs_smooth = 0.0;
};

/// Max-abs residuals per expression per validity interval, one stencil width
/// away from interval boundaries.
ResidualReport residual_check(const DelayedVariationalProblem& p, const Trajectory& traj,
                              const TwoIntervalSystem& system, const std::string& label);
ResidualReport residual_check(const OptimalControlDelayProblem& p, const Trajectory& traj,
                              const PontryaginSystem& system);

/// Worst relative disagreement between the analytic discrete gradient and
/// central finite differences (step 1e-6 * max(1, |x_j|), denominators
/// max(1, |g_j|)).
double gradient_check(const DiscretizedObjective& obj, const std::vector<double>& point);

struct DhDtReport {
  int used = 0;
  double max_mismatch = 0.0;         // corners included
  int argmax = -1;
  double max_mismatch_smooth = 0.0;  // corner neighbourhoods excluded
  int argmax_smooth = -1;
};

/// Central-difference d/dt of H(t) along the trajectory against the explicit
/// time partial of H.
DhDtReport dh_dt_check(const OptimalControlDelayProblem& p, const Trajectory& traj);

struct AdmissibilityReport {
  double prehistory_max = 0.0;  // max |q - delta| over nodes in [t1 - tau, t1]
  double terminal_max = 0.0;    // max |q(t2) - terminal|, 0 when the endpoint is free
};

/// Data-conformance of a trajectory against the problem's boundary data;
/// meaningful before any interior condition is judged.
AdmissibilityReport admissibility_check(const DelayedVariationalProblem& p, const Trajectory& traj);
AdmissibilityReport admissibility_check(const OptimalControlDelayProblem& p, const Trajectory& traj);

}  // namespace delvar
