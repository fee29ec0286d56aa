#include "delvar/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace delvar {

namespace {

std::vector<int> collect_corners(const Prehistory& pre, double t1, double t2, double tau, const Grid& g) {
  std::set<int> nodes;
  auto add_time = [&](double t) {
    double pos = (t - t1) / g.h + g.k;
    double r = std::round(pos);
    if (std::fabs(pos - r) > 1e-6) return;  // off-grid events cannot be excluded exactly; keep all nodes
    int node = static_cast<int>(r);
    if (node >= 0 && node <= g.last) nodes.insert(node);
  };
  for (double t = t1; t <= t2 + 0.5 * g.h; t += tau) add_time(t);
  for (const auto& comp : pre.components) {
    for (std::size_t i = 0; i + 1 < comp.size(); ++i) {
      double junction = comp[i].hi;
      for (double t = junction + tau; t <= t2 + 0.5 * g.h; t += tau) add_time(t);
    }
  }
  return {nodes.begin(), nodes.end()};
}

VerifyContext context_common(const Prehistory& pre, int n, int m, double t1, double t2, double tau,
                             const Trajectory& traj) {
  VerifyContext ctx;
  ctx.prehistory = &pre;
  ctx.n = n;
  ctx.m = m;
  ctx.t1 = t1;
  ctx.t2 = t2;
  ctx.tau = tau;
  ctx.grid = align_grid(t1, t2, tau, traj);
  if (traj.n != n) throw ValidationError("trajectory state dimension does not match the problem");
  ctx.corners = collect_corners(pre, t1, t2, tau, ctx.grid);
  return ctx;
}

}  // namespace

VerifyContext make_context(const DelayedVariationalProblem& p, const Trajectory& traj) {
  return context_common(p.prehistory, p.n, 0, p.t1, p.t2, p.tau, traj);
}

VerifyContext make_context(const OptimalControlDelayProblem& p, const Trajectory& traj) {
  VerifyContext ctx = context_common(p.prehistory, p.n, p.m, p.t1, p.t2, p.tau, traj);
  if (traj.has_controls && traj.m != p.m) {
    throw ValidationError("trajectory control dimension does not match the problem");
  }
  return ctx;
}

namespace {

double state_value(const VerifyContext& ctx, const Trajectory& traj, int node, int comp) {
  if (node < ctx.grid.k) {
    double t = ctx.t1 + (node - ctx.grid.k) * ctx.grid.h;
    return prehistory_eval(*ctx.prehistory, t)[static_cast<std::size_t>(comp) - 1];
  }
  return traj.state(node, comp);
}

double state_derivative(const VerifyContext& ctx, const Trajectory& traj, int node, int comp, int order) {
  if (node < ctx.grid.k) {
    double t = ctx.t1 + (node - ctx.grid.k) * ctx.grid.h;
    return prehistory_derivative(*ctx.prehistory, t, order)[static_cast<std::size_t>(comp) - 1];
  }
  if (node < 1 || node + 1 > ctx.grid.last) {
    throw BindError("derivative stencil at node " + std::to_string(node) + " leaves the grid");
  }
  double prev = state_value(ctx, traj, node - 1, comp);
  double next = state_value(ctx, traj, node + 1, comp);
  if (order == 1) return (next - prev) / (2.0 * ctx.grid.h);
  double mid = state_value(ctx, traj, node, comp);
  return (next - 2.0 * mid + prev) / (ctx.grid.h * ctx.grid.h);
}

double costate_value(const VerifyContext& ctx, const Trajectory& traj, int node, int comp) {
  if (!traj.has_costates) throw BindError("trajectory carries no costates");
  if (node < ctx.grid.k || node > ctx.grid.last) {
    throw BindError("costate requested outside [t1, t2] (node " + std::to_string(node) + ")");
  }
  double v = traj.costate(node, comp);
  if (std::isnan(v)) throw BindError("costate undefined at node " + std::to_string(node));
  return v;
}

}  // namespace

Binding bind_node(const VerifyContext& ctx, const Trajectory& traj, int node, const std::vector<Symbol>& needs) {
  if (node < 0 || node > ctx.grid.last) throw BindError("node " + std::to_string(node) + " outside the grid");
  Binding b;
  b.time_value = ctx.t1 + (node - ctx.grid.k) * ctx.grid.h;
  b.tau_value = ctx.tau;
  for (const Symbol& s : needs) {
    if (s.is_time()) continue;
    int at = node + s.offset * ctx.grid.k;
    if (at < 0 || at > ctx.grid.last) {
      throw BindError("symbol '" + s.name() + "' reads node " + std::to_string(at) + " outside the grid");
    }
    double v = 0.0;
    switch (s.kind) {
      case SymKind::state:
        v = state_value(ctx, traj, at, s.index);
        break;
      case SymKind::state_dot:
        v = state_derivative(ctx, traj, at, s.index, 1);
        break;
      case SymKind::state_ddot:
        v = state_derivative(ctx, traj, at, s.index, 2);
        break;
      case SymKind::control:
        if (!traj.has_controls) throw BindError("trajectory carries no controls");
        v = traj.control(at, s.index);
        break;
      case SymKind::costate:
        v = costate_value(ctx, traj, at, s.index);
        break;
      case SymKind::costate_dot: {
        double prev = costate_value(ctx, traj, at - 1, s.index);
        double next = costate_value(ctx, traj, at + 1, s.index);
        v = (next - prev) / (2.0 * ctx.grid.h);
        break;
      }
      default:
        break;
    }
    b.set(s, v);
  }
  return b;
}

bool corner_affected(const VerifyContext& ctx, int node, const std::vector<int>& offsets, int radius) {
  for (int off : offsets) {
    int centre = node + off * ctx.grid.k;
    for (int corner : ctx.corners) {
      if (std::abs(centre - corner) <= radius) return true;
    }
  }
  return false;
}

namespace {

std::vector<int> offsets_of(const Expr& e) {
  std::set<int> offs;
  offs.insert(0);
  for (const Symbol& s : symbols_of(e)) {
    if (!s.is_time()) offs.insert(s.offset);
  }
  return {offs.begin(), offs.end()};
}

// Charge values over [first, last] plus per-smooth-segment constancy stats.
IntervalDrift drift_interval(const VerifyContext& ctx, const Trajectory& traj, const Expr& charge,
                             const std::string& piece, int first, int last) {
  IntervalDrift out;
  out.piece = piece;
  out.first_node = first;
  out.last_node = last;
  auto syms = symbols_of(charge);
  std::vector<Symbol> needs(syms.begin(), syms.end());
  std::vector<int> offsets = offsets_of(charge);

  for (int node = first; node <= last; ++node) {
    Binding b;
    try {
      b = bind_node(ctx, traj, node, needs);
    } catch (const BindError&) {
      continue;
    }
    double value;
    try {
      value = eval(charge, b);
    } catch (const EvalError&) {
      continue;
    }
    out.profile.push_back({node, *b.time_value, value});
  }

  // Split at corners; drop nodes whose stencils touch a corner neighbourhood.
  auto segment_index = [&](int node) {
    int idx = 0;
    for (int corner : ctx.corners) {
      if (corner > first && corner <= last && node >= corner) ++idx;
    }
    return idx;
  };
  std::map<int, std::vector<const ChargeSample*>> segments;
  for (const auto& sample : out.profile) {
    if (corner_affected(ctx, sample.node, offsets)) continue;
    segments[segment_index(sample.node)].push_back(&sample);
  }
  for (const auto& [idx, samples] : segments) {
    (void)idx;
    if (samples.empty()) continue;
    SegmentDrift seg;
    seg.first_node = samples.front()->node;
    seg.last_node = samples.back()->node;
    seg.used = static_cast<int>(samples.size());
    double sum = 0.0;
    for (const auto* s : samples) sum += s->value;
    seg.mean = sum / seg.used;
    for (const auto* s : samples) seg.max_abs_dev = std::max(seg.max_abs_dev, std::fabs(s->value - seg.mean));
    seg.rel_drift = seg.max_abs_dev / std::max(1.0, std::fabs(seg.mean));
    out.segments.push_back(seg);
    out.rel_drift = std::max(out.rel_drift, seg.rel_drift);
  }
  return out;
}

}  // namespace

DriftReport charge_drift(const DelayedVariationalProblem& p, const Trajectory& traj, const PiecewiseCharge& charge) {
  VerifyContext ctx = make_context(p, traj);
  // Structural guarantee: the outer piece never reads advanced symbols.
  for (const Symbol& s : symbols_of(charge.outer)) {
    if (s.offset > 0) throw ValidationError("outer charge piece references an advanced symbol");
  }
  int junction = ctx.grid.last - ctx.grid.k;  // node of t2 - tau
  DriftReport report;
  report.intervals.push_back(drift_interval(ctx, traj, charge.inner, "inner", ctx.grid.k, junction));
  report.intervals.push_back(drift_interval(ctx, traj, charge.outer, "outer", junction, ctx.grid.last));
  for (const auto& iv : report.intervals) report.rel_drift = std::max(report.rel_drift, iv.rel_drift);
  return report;
}

DriftReport charge_drift(const OptimalControlDelayProblem& p, const Trajectory& traj, const Expr& charge) {
  VerifyContext ctx = make_context(p, traj);
  DriftReport report;
  report.intervals.push_back(drift_interval(ctx, traj, charge, "full", ctx.grid.k, ctx.grid.last));
  report.rel_drift = report.intervals.front().rel_drift;
  return report;
}

namespace {

ResidualStats residual_interval(const VerifyContext& ctx, const Trajectory& traj, const Expr& residual,
                                const std::string& label, int first, int last) {
  ResidualStats stats;
  stats.label = label;
  auto syms = symbols_of(residual);
  std::vector<Symbol> needs(syms.begin(), syms.end());
  std::vector<int> offsets = offsets_of(residual);
  for (int node = first + 1; node <= last - 1; ++node) {  // one stencil width off the boundaries
    Binding b;
    try {
      b = bind_node(ctx, traj, node, needs);
    } catch (const BindError&) {
      continue;
    }
    double value;
    try {
      value = eval(residual, b);
    } catch (const EvalError&) {
      continue;
    }
    ++stats.used;
    double a = std::fabs(value);
    if (a > stats.max_abs) {
      stats.max_abs = a;
      stats.argmax = node;
    }
    if (!corner_affected(ctx, node, offsets) && a > stats.max_abs_smooth) {
      stats.max_abs_smooth = a;
      stats.argmax_smooth = node;
    }
  }
  return stats;
}

void push_stats(ResidualReport& report, ResidualStats stats) {
  report.max_abs = std::max(report.max_abs, stats.max_abs);
  report.max_abs_smooth = std::max(report.max_abs_smooth, stats.max_abs_smooth);
  report.entries.push_back(std::move(stats));
}

}  // namespace

ResidualReport residual_check(const DelayedVariationalProblem& p, const Trajectory& traj,
                              const TwoIntervalSystem& system, const std::string& label) {
  VerifyContext ctx = make_context(p, traj);
  int junction = ctx.grid.last - ctx.grid.k;
  ResidualReport report;
  for (std::size_t i = 0; i < system.inner.size(); ++i) {
    push_stats(report, residual_interval(ctx, traj, system.inner[i], label + "[" + std::to_string(i + 1) + "] inner",
                                         ctx.grid.k, junction));
  }
  for (std::size_t i = 0; i < system.outer.size(); ++i) {
    push_stats(report, residual_interval(ctx, traj, system.outer[i], label + "[" + std::to_string(i + 1) + "] outer",
                                         junction, ctx.grid.last));
  }
  return report;
}

ResidualReport residual_check(const OptimalControlDelayProblem& p, const Trajectory& traj,
                              const PontryaginSystem& system) {
  VerifyContext ctx = make_context(p, traj);
  int junction = ctx.grid.last - ctx.grid.k;
  ResidualReport report;
  auto run_branch = [&](const PontryaginBranch& branch, const std::string& suffix, int first, int last) {
    for (std::size_t i = 0; i < branch.state.size(); ++i) {
      push_stats(report, residual_interval(ctx, traj, branch.state[i],
                                           "state[" + std::to_string(i + 1) + "] " + suffix, first, last));
    }
    for (std::size_t i = 0; i < branch.costate.size(); ++i) {
      push_stats(report, residual_interval(ctx, traj, branch.costate[i],
                                           "costate[" + std::to_string(i + 1) + "] " + suffix, first, last));
    }
    for (std::size_t i = 0; i < branch.stationary.size(); ++i) {
      push_stats(report, residual_interval(ctx, traj, branch.stationary[i],
                                           "stationary[" + std::to_string(i + 1) + "] " + suffix, first, last));
    }
  };
  run_branch(system.inner, "inner", ctx.grid.k, junction);
  run_branch(system.outer, "outer", junction, ctx.grid.last);
  return report;
}

double gradient_check(const DiscretizedObjective& obj, const std::vector<double>& point) {
  std::vector<double> g = obj.gradient(point);
  std::vector<double> xp = point, xm = point;
  double worst = 0.0;
  for (std::size_t j = 0; j < point.size(); ++j) {
    double step = 1e-6 * std::max(1.0, std::fabs(point[j]));
    xp[j] += step;
    xm[j] -= step;
    double fd = (obj.objective(xp) - obj.objective(xm)) / (2.0 * step);
    xp[j] = point[j];
    xm[j] = point[j];
    double err = std::fabs(fd - g[j]) / std::max(1.0, std::fabs(g[j]));
    worst = std::max(worst, err);
  }
  return worst;
}

namespace {

double prehistory_mismatch(const Prehistory& pre, const VerifyContext& ctx, const Trajectory& traj) {
  double worst = 0.0;
  for (int j = 0; j <= ctx.grid.k; ++j) {
    double t = ctx.t1 + (j - ctx.grid.k) * ctx.grid.h;
    std::vector<double> expected = prehistory_eval(pre, t);
    for (int c = 1; c <= ctx.n; ++c) {
      worst = std::max(worst, std::fabs(traj.state(j, c) - expected[static_cast<std::size_t>(c) - 1]));
    }
  }
  return worst;
}

}  // namespace

AdmissibilityReport admissibility_check(const DelayedVariationalProblem& p, const Trajectory& traj) {
  VerifyContext ctx = make_context(p, traj);
  AdmissibilityReport report;
  report.prehistory_max = prehistory_mismatch(p.prehistory, ctx, traj);
  if (p.terminal) {
    for (int c = 1; c <= p.n; ++c) {
      report.terminal_max = std::max(
          report.terminal_max,
          std::fabs(traj.state(ctx.grid.last, c) - (*p.terminal)[static_cast<std::size_t>(c) - 1]));
    }
  }
  return report;
}

AdmissibilityReport admissibility_check(const OptimalControlDelayProblem& p, const Trajectory& traj) {
  VerifyContext ctx = make_context(p, traj);
  AdmissibilityReport report;
  report.prehistory_max = prehistory_mismatch(p.prehistory, ctx, traj);
  return report;
}

DhDtReport dh_dt_check(const OptimalControlDelayProblem& p, const Trajectory& traj) {
  VerifyContext ctx = make_context(p, traj);
  HamiltonianTimePair pair = dH_dt_residual(p);
  auto h_syms = symbols_of(pair.hamiltonian);
  auto dt_syms = symbols_of(pair.time_partial);
  std::vector<Symbol> h_needs(h_syms.begin(), h_syms.end());
  std::vector<Symbol> dt_needs(dt_syms.begin(), dt_syms.end());
  std::vector<int> offsets = offsets_of(pair.hamiltonian);

  // H at every node where it binds.
  std::vector<double> h_values(static_cast<std::size_t>(ctx.grid.last) + 1,
                               std::numeric_limits<double>::quiet_NaN());
  for (int node = ctx.grid.k; node <= ctx.grid.last; ++node) {
    try {
      h_values[static_cast<std::size_t>(node)] = eval(pair.hamiltonian, bind_node(ctx, traj, node, h_needs));
    } catch (const Error&) {
      continue;
    }
  }

  DhDtReport report;
  for (int node = ctx.grid.k + 1; node <= ctx.grid.last - 1; ++node) {
    double prev = h_values[static_cast<std::size_t>(node) - 1];
    double next = h_values[static_cast<std::size_t>(node) + 1];
    if (std::isnan(prev) || std::isnan(next)) continue;
    double expected;
    try {
      expected = eval(pair.time_partial, bind_node(ctx, traj, node, dt_needs));
    } catch (const Error&) {
      continue;
    }
    double mismatch = std::fabs((next - prev) / (2.0 * ctx.grid.h) - expected);
    ++report.used;
    if (mismatch > report.max_mismatch) {
      report.max_mismatch = mismatch;
      report.argmax = node;
    }
    bool affected = corner_affected(ctx, node, offsets) || corner_affected(ctx, node - 1, offsets) ||
                    corner_affected(ctx, node + 1, offsets);
    if (!affected && mismatch > report.max_mismatch_smooth) {
      report.max_mismatch_smooth = mismatch;
      report.argmax_smooth = node;
    }
  }
  return report;
}

}  // namespace delvar
