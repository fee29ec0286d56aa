// delvar: derive, test and verify delayed variational problems from the
// command line. See README.md for the file format and output conventions.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "delvar/conditions.hpp"
#include "delvar/expr_text.hpp"
#include "delvar/noether.hpp"
#include "delvar/problem_file.hpp"
#include "delvar/solver.hpp"
#include "delvar/verify.hpp"

namespace {

using namespace delvar;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_inconclusive = 2;
constexpr int exit_error = 3;

void print_system(const std::string& name, const TwoIntervalSystem& sys, double t1, double t2, double tau) {
  std::cout << name << " (inner, " << num(t1) << " <= t <= " << num(t2 - tau) << "):\n";
  for (const auto& e : sys.inner) std::cout << "  " << render(e) << " = 0\n";
  std::cout << name << " (outer, " << num(t2 - tau) << " <= t <= " << num(t2) << "):\n";
  for (const auto& e : sys.outer) std::cout << "  " << render(e) << " = 0\n";
}

int cmd_derive(const std::string& path) {
  ProblemFile file = parse_problem_file(path);
  if (!file.is_control()) {
    const auto& p = file.variational();
    std::cout << "kind: variational n=" << p.n << " tau=" << num(p.tau) << " t1=" << num(p.t1)
              << " t2=" << num(p.t2) << "\n";
    print_system("Euler-Lagrange", euler_lagrange(p), p.t1, p.t2, p.tau);
    print_system("DuBois-Reymond", dubois_reymond(p), p.t1, p.t2, p.tau);
    return exit_ok;
  }
  const auto& p = file.control();
  std::cout << "kind: control n=" << p.n << " m=" << p.m << " tau=" << num(p.tau) << " t1=" << num(p.t1)
            << " t2=" << num(p.t2) << "\n";
  std::cout << "Hamiltonian:\n  H = " << render(hamiltonian(p)) << "\n";
  PontryaginSystem sys = pontryagin_system(p);
  auto print_branch = [&](const PontryaginBranch& branch, const char* which, double lo, double hi) {
    std::cout << "Hamiltonian system (" << which << ", " << num(lo) << " <= t <= " << num(hi) << "):\n";
    for (const auto& e : branch.state) std::cout << "  " << render(e) << " = 0\n";
    for (const auto& e : branch.costate) std::cout << "  " << render(e) << " = 0\n";
    std::cout << "Stationary (" << which << ", " << num(lo) << " <= t <= " << num(hi) << "):\n";
    for (const auto& e : branch.stationary) std::cout << "  " << render(e) << " = 0\n";
  };
  print_branch(sys.inner, "inner", p.t1, p.t2 - p.tau);
  print_branch(sys.outer, "outer", p.t2 - p.tau, p.t2);
  HamiltonianTimePair pair = dH_dt_residual(p);
  std::cout << "dH/dt condition:\n  d/dt H = " << render(pair.time_partial) << "\n";
  return exit_ok;
}

const GeneratorSet& require_generators(const ProblemFile& file) {
  if (!file.generators) throw ValidationError("the problem file has no [generators] section");
  return *file.generators;
}

int cmd_invariance(const std::string& path, const InvarianceConfig& cfg) {
  ProblemFile file = parse_problem_file(path);
  const GeneratorSet& g = require_generators(file);
  InvarianceReport report = file.is_control() ? check_invariance(file.control(), g, cfg)
                                              : check_invariance(file.variational(), g, cfg);
  auto show = [&](const char* which, const IntervalInvariance& iv) {
    std::cout << which << ": ";
    if (iv.symbolic_zero) {
      std::cout << "symbolic zero\n";
    } else if (iv.sampled_max) {
      std::cout << "sampled max |integrand| = " << num(*iv.sampled_max) << " over " << report.samples
                << " samples\n";
    } else {
      std::cout << "not sampled\n";
    }
  };
  show("inner", report.inner);
  show("outer", report.outer);
  bool symbolic = report.inner.symbolic_zero && report.outer.symbolic_zero;
  std::cout << verdict_name(report.verdict) << (symbolic ? " (symbolic)" : " (sampled)") << "\n";
  switch (report.verdict) {
    case Verdict::invariant: return exit_ok;
    case Verdict::not_invariant: return exit_check_failed;
    case Verdict::inconclusive: return exit_inconclusive;
  }
  return exit_inconclusive;
}

int cmd_charge(const std::string& path) {
  ProblemFile file = parse_problem_file(path);
  const GeneratorSet& g = require_generators(file);
  if (file.is_control()) {
    std::cout << "charge (t in [" << num(file.control().t1) << ", " << num(file.control().t2)
              << "]): " << render(noether_charge_oc(file.control(), g)) << "\n";
    return exit_ok;
  }
  const auto& p = file.variational();
  PiecewiseCharge charge = noether_charge(p, g);
  std::cout << "inner (t in [" << num(p.t1) << ", " << num(p.t2 - p.tau) << "]): " << render(charge.inner) << "\n";
  std::cout << "outer (t in [" << num(p.t2 - p.tau) << ", " << num(p.t2) << "]): " << render(charge.outer) << "\n";
  return exit_ok;
}

int cmd_solve(const std::string& path, const SolverConfig& cfg, const std::string& out_path) {
  ProblemFile file = parse_problem_file(path);
  if (file.is_control()) {
    throw ValidationError("solve handles variational problems; control trajectories are supplied to verify");
  }
  SolveReport report = solve(file.variational(), cfg);
  std::cout << "nodes: " << report.trajectory.nodes() << "\n";
  std::cout << "objective: " << num(report.objective) << "\n";
  std::cout << "grad_inf_norm: " << num(report.grad_inf_norm) << "\n";
  std::cout << "iterations: " << report.iterations << "\n";
  std::cout << "converged: " << (report.converged ? "yes" : "no") << "\n";
  if (!out_path.empty()) {
    write_trajectory_csv(report.trajectory, out_path);
    std::cout << "trajectory: " << out_path << "\n";
  }
  return report.converged ? exit_ok : exit_check_failed;
}

void print_residuals(const ResidualReport& report, const VerifyContext& ctx) {
  for (const auto& e : report.entries) {
    auto t_of = [&](int node) { return node < 0 ? 0.0 : ctx.t1 + (node - ctx.grid.k) * ctx.grid.h; };
    std::cout << e.label << ": max " << num(e.max_abs);
    if (e.argmax >= 0) std::cout << " at t=" << num(t_of(e.argmax));
    std::cout << "; smooth max " << num(e.max_abs_smooth);
    if (e.argmax_smooth >= 0) std::cout << " at t=" << num(t_of(e.argmax_smooth));
    std::cout << " (" << e.used << " nodes)\n";
  }
}

void print_drift(const DriftReport& drift) {
  for (const auto& iv : drift.intervals) {
    std::cout << "charge " << iv.piece << ": rel drift " << num(iv.rel_drift) << ", means [";
    for (std::size_t s = 0; s < iv.segments.size(); ++s) {
      if (s > 0) std::cout << ", ";
      std::cout << num(iv.segments[s].mean);
    }
    std::cout << "] over " << iv.profile.size() << " nodes\n";
  }
}

void write_charge_csv(const DriftReport& drift, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "t,charge_value,piece\n";
  for (const auto& iv : drift.intervals) {
    for (const auto& s : iv.profile) {
      out << num(s.t) << "," << num(s.value) << "," << iv.piece << "\n";
    }
  }
}

int cmd_verify(const std::string& path, const std::string& traj_path, const SolverConfig& cfg, bool h_given,
               double tol, const std::string& out_path) {
  ProblemFile file = parse_problem_file(path);
  bool pass = true;

  if (!file.is_control()) {
    const auto& p = file.variational();
    Trajectory traj;
    if (!traj_path.empty()) {
      traj = read_trajectory_csv(traj_path);
      std::cout << "trajectory: " << traj_path << " (" << traj.nodes() << " nodes)\n";
    } else {
      if (!h_given) throw ValidationError("verify needs --traj or --h");
      SolveReport sr = solve(p, cfg);
      if (!sr.converged) {
        std::cout << "solve did not converge (grad_inf_norm " << num(sr.grad_inf_norm) << ")\n";
        pass = false;
      }
      traj = std::move(sr.trajectory);
      std::cout << "trajectory: solved, h=" << num(cfg.h) << " (" << traj.nodes() << " nodes)\n";
    }
    VerifyContext ctx = make_context(p, traj);

    AdmissibilityReport adm = admissibility_check(p, traj);
    std::cout << "admissibility: prehistory max " << num(adm.prehistory_max) << ", terminal max "
              << num(adm.terminal_max) << "\n";
    if (adm.prehistory_max > tol || adm.terminal_max > tol) pass = false;

    ResidualReport el = residual_check(p, traj, euler_lagrange(p), "EL");
    print_residuals(el, ctx);
    if (el.max_abs_smooth > tol) pass = false;

    ResidualReport dr = residual_check(p, traj, dubois_reymond(p), "DR");
    print_residuals(dr, ctx);
    if (dr.max_abs_smooth > tol) pass = false;

    if (file.generators) {
      DriftReport drift = charge_drift(p, traj, noether_charge(p, *file.generators));
      print_drift(drift);
      if (drift.rel_drift > tol) pass = false;
      if (!out_path.empty()) {
        write_charge_csv(drift, out_path);
        std::cout << "charge profile: " << out_path << "\n";
      }
    }
  } else {
    const auto& p = file.control();
    if (traj_path.empty()) {
      throw ValidationError("verify of a control problem needs --traj with q, u and p columns");
    }
    Trajectory traj = read_trajectory_csv(traj_path);
    std::cout << "trajectory: " << traj_path << " (" << traj.nodes() << " nodes)\n";
    VerifyContext ctx = make_context(p, traj);

    AdmissibilityReport adm = admissibility_check(p, traj);
    std::cout << "admissibility: prehistory max " << num(adm.prehistory_max) << "\n";
    if (adm.prehistory_max > tol) pass = false;

    ResidualReport pr = residual_check(p, traj, pontryagin_system(p));
    print_residuals(pr, ctx);
    if (pr.max_abs_smooth > tol) pass = false;

    DhDtReport dh = dh_dt_check(p, traj);
    std::cout << "dH/dt vs dH/dt-partial: max mismatch " << num(dh.max_mismatch) << "; smooth max "
              << num(dh.max_mismatch_smooth) << " (" << dh.used << " nodes)\n";
    if (dh.max_mismatch_smooth > tol) pass = false;

    if (file.generators) {
      DriftReport drift = charge_drift(p, traj, noether_charge_oc(p, *file.generators));
      print_drift(drift);
      if (drift.rel_drift > tol) pass = false;
      if (!out_path.empty()) {
        write_charge_csv(drift, out_path);
        std::cout << "charge profile: " << out_path << "\n";
      }
    }
  }

  std::cout << "result: " << (pass ? "PASS" : "FAIL") << " (tol=" << num(tol) << ")\n";
  return pass ? exit_ok : exit_check_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"delayed variational problems: necessary conditions, conservation laws, extremals"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print this help message and exit");  // --h stays free for the grid step

  std::string file;
  std::string traj_path;
  std::string out_path;
  delvar::SolverConfig solver_cfg;
  delvar::InvarianceConfig inv_cfg;
  double tol = 0.05;
  bool h_given = false;

  auto* derive = app.add_subcommand("derive", "print the necessary conditions");
  derive->add_option("file", file, "problem definition file")->required();

  auto* invariance = app.add_subcommand("invariance", "check invariance under the file's generators");
  invariance->add_option("file", file, "problem definition file")->required();
  invariance->add_option("--samples", inv_cfg.samples, "sample count for the numeric fallback");
  invariance->add_option("--seed", inv_cfg.seed, "sampling seed");
  invariance->add_option("--tol", inv_cfg.tolerance, "absolute tolerance on integrand values");

  auto* charge = app.add_subcommand("charge", "print the conserved charge for the file's generators");
  charge->add_option("file", file, "problem definition file")->required();

  auto* solve_cmd = app.add_subcommand("solve", "compute an extremal by direct transcription");
  solve_cmd->set_help_flag("--help", "print this help message and exit");
  solve_cmd->add_option("file", file, "problem definition file")->required();
  solve_cmd->add_option("--h", solver_cfg.h, "grid step (tau/h and (t2-t1)/h must be integers)")->required();
  solve_cmd->add_option("--gtol", solver_cfg.gtol, "gradient infinity-norm stopping tolerance");
  solve_cmd->add_option("--max-iter", solver_cfg.max_iter, "iteration cap");
  solve_cmd->add_option("--out", out_path, "write the trajectory CSV here");

  auto* verify = app.add_subcommand("verify", "check residuals and charge drift along a trajectory");
  verify->set_help_flag("--help", "print this help message and exit");
  verify->add_option("file", file, "problem definition file")->required();
  verify->add_option("--traj", traj_path, "trajectory CSV (otherwise solve with --h first)");
  auto* h_opt = verify->add_option("--h", solver_cfg.h, "grid step used when solving internally");
  verify->add_option("--gtol", solver_cfg.gtol, "solver gradient tolerance");
  verify->add_option("--tol", tol, "acceptance tolerance for residuals and relative drift");
  verify->add_option("--out", out_path, "write the charge profile CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return exit_error;
  }
  h_given = h_opt->count() > 0;

  try {
    if (derive->parsed()) return cmd_derive(file);
    if (invariance->parsed()) return cmd_invariance(file, inv_cfg);
    if (charge->parsed()) return cmd_charge(file);
    if (solve_cmd->parsed()) return cmd_solve(file, solver_cfg, out_path);
    if (verify->parsed()) return cmd_verify(file, traj_path, solver_cfg, h_given, tol, out_path);
  } catch (const delvar::Error& e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
    return exit_error;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return exit_error;
  }
  return exit_error;
}
