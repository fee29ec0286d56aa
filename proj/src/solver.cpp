#include "delvar/solver.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace delvar {

DiscretizedObjective::DiscretizedObjective(const DelayedVariationalProblem& p, double h) : problem_(p) {
  require_valid(validate(p));
  grid_ = make_grid(p.t1, p.t2, p.tau, h);

  // Fixed values: prehistory nodes (and the terminal node when given).
  fixed_values_.assign((static_cast<std::size_t>(grid_.last) + 1) * p.n, 0.0);
  for (int j = 0; j <= grid_.k; ++j) {
    double t = p.t1 + (j - grid_.k) * h;
    std::vector<double> v = prehistory_eval(p.prehistory, t);
    for (int c = 0; c < p.n; ++c) fixed_values_[static_cast<std::size_t>(j) * p.n + c] = v[static_cast<std::size_t>(c)];
  }
  var_of_node_.assign(static_cast<std::size_t>(grid_.last) + 1, -1);
  for (int j = grid_.k + 1; j < grid_.last; ++j) {
    var_of_node_[static_cast<std::size_t>(j)] = static_cast<int>(free_nodes_.size()) * p.n;
    free_nodes_.push_back(j);
  }
  if (p.terminal) {
    for (int c = 0; c < p.n; ++c) {
      fixed_values_[static_cast<std::size_t>(grid_.last) * p.n + c] = (*p.terminal)[static_cast<std::size_t>(c)];
    }
  } else {
    var_of_node_[static_cast<std::size_t>(grid_.last)] = static_cast<int>(free_nodes_.size()) * p.n;
    free_nodes_.push_back(grid_.last);
  }

  // Cached partials of L with respect to its four trajectory slots per
  // component (explicit t needs no cache).
  slots_.reserve(static_cast<std::size_t>(4) * p.n);
  for (int i = 1; i <= p.n; ++i) slots_.push_back(Symbol::make(SymKind::state, i, 0));
  for (int i = 1; i <= p.n; ++i) slots_.push_back(Symbol::make(SymKind::state_dot, i, 0));
  for (int i = 1; i <= p.n; ++i) slots_.push_back(Symbol::make(SymKind::state, i, -1));
  for (int i = 1; i <= p.n; ++i) slots_.push_back(Symbol::make(SymKind::state_dot, i, -1));
  first_partials_.reserve(slots_.size());
  for (const Symbol& s : slots_) first_partials_.push_back(partial(problem_.lagrangian, s));

  analytic_hessian_ = is_polynomial(problem_.lagrangian) && polynomial_degree(problem_.lagrangian) <= 4;
  if (analytic_hessian_) {
    second_partials_.resize(slots_.size());
    for (std::size_t a = 0; a < slots_.size(); ++a) {
      second_partials_[a].reserve(slots_.size() - a);
      for (std::size_t b = a; b < slots_.size(); ++b) {
        second_partials_[a].push_back(partial(first_partials_[a], slots_[b]));
      }
    }
  }
}

DiscretizedObjective discretize(const DelayedVariationalProblem& p, double h) {
  return DiscretizedObjective(p, h);
}

std::vector<double> DiscretizedObjective::initial_guess() const {
  const int n = problem_.n;
  std::vector<double> start = prehistory_eval(problem_.prehistory, problem_.t1);
  std::vector<double> x(static_cast<std::size_t>(dimension()), 0.0);
  for (std::size_t f = 0; f < free_nodes_.size(); ++f) {
    int node = free_nodes_[f];
    double alpha = problem_.terminal ? static_cast<double>(node - grid_.k) / grid_.steps : 0.0;
    for (int c = 0; c < n; ++c) {
      double target = problem_.terminal ? (*problem_.terminal)[static_cast<std::size_t>(c)] : start[static_cast<std::size_t>(c)];
      x[f * static_cast<std::size_t>(n) + static_cast<std::size_t>(c)] =
          (1.0 - alpha) * start[static_cast<std::size_t>(c)] + alpha * target;
    }
  }
  return x;
}

std::vector<double> DiscretizedObjective::full_values(const std::vector<double>& x) const {
  std::vector<double> q = fixed_values_;
  const int n = problem_.n;
  for (std::size_t f = 0; f < free_nodes_.size(); ++f) {
    int node = free_nodes_[f];
    for (int c = 0; c < n; ++c) {
      q[static_cast<std::size_t>(node) * n + c] = x[f * static_cast<std::size_t>(n) + static_cast<std::size_t>(c)];
    }
  }
  return q;
}

void DiscretizedObjective::node_binding(const std::vector<double>& q, int node, Binding& b) const {
  const int n = problem_.n;
  const double h = grid_.h;
  b.time_value = problem_.t1 + (node - grid_.k) * h;
  b.tau_value = problem_.tau;
  auto at = [&](int j, int c) { return q[static_cast<std::size_t>(j) * n + c]; };
  for (int c = 0; c < n; ++c) {
    b.set(Symbol::make(SymKind::state, c + 1, 0), at(node, c));
    b.set(Symbol::make(SymKind::state_dot, c + 1, 0), (at(node + 1, c) - at(node, c)) / h);
    b.set(Symbol::make(SymKind::state, c + 1, -1), at(node - grid_.k, c));
    b.set(Symbol::make(SymKind::state_dot, c + 1, -1), (at(node - grid_.k + 1, c) - at(node - grid_.k, c)) / h);
  }
}

double DiscretizedObjective::objective(const std::vector<double>& x) const {
  std::vector<double> q = full_values(x);
  Binding b;
  double acc = 0.0;
  for (int i = grid_.k; i < grid_.last; ++i) {
    node_binding(q, i, b);
    double v;
    try {
      v = eval(problem_.lagrangian, b);
    } catch (const EvalError& e) {
      throw SolverError("objective evaluation failed at node " + std::to_string(i) + ": " + e.what());
    }
    if (std::isnan(v)) {
      throw SolverError("objective is NaN at node " + std::to_string(i));
    }
    acc += v;
  }
  return grid_.h * acc;
}

std::vector<double> DiscretizedObjective::gradient(const std::vector<double>& x) const {
  const int n = problem_.n;
  const double h = grid_.h;
  std::vector<double> q = full_values(x);
  std::vector<double> g(static_cast<std::size_t>(dimension()), 0.0);
  auto add = [&](int node, int c, double v) {
    int base = var_of_node_[static_cast<std::size_t>(node)];
    if (base >= 0) g[static_cast<std::size_t>(base + c)] += v;
  };
  Binding b;
  for (int i = grid_.k; i < grid_.last; ++i) {
    node_binding(q, i, b);
    for (int c = 0; c < n; ++c) {
      double g_q, g_dq, g_qtau, g_dqtau;
      try {
        g_q = eval(first_partials_[static_cast<std::size_t>(c)], b);
        g_dq = eval(first_partials_[static_cast<std::size_t>(n + c)], b);
        g_qtau = eval(first_partials_[static_cast<std::size_t>(2 * n + c)], b);
        g_dqtau = eval(first_partials_[static_cast<std::size_t>(3 * n + c)], b);
      } catch (const EvalError& e) {
        throw SolverError("gradient evaluation failed at node " + std::to_string(i) + ": " + e.what());
      }
      add(i, c, h * g_q - g_dq);
      add(i + 1, c, g_dq);
      add(i - grid_.k, c, h * g_qtau - g_dqtau);
      add(i - grid_.k + 1, c, g_dqtau);
    }
  }
  return g;
}

std::vector<double> DiscretizedObjective::hessian(const std::vector<double>& x) const {
  const int dim = dimension();
  std::vector<double> out(static_cast<std::size_t>(dim) * dim, 0.0);
  const int n = problem_.n;
  const double h = grid_.h;

  if (!analytic_hessian_) {
    // Central differences of the analytic gradient.
    std::vector<double> xp = x, xm = x;
    for (int j = 0; j < dim; ++j) {
      double step = 1e-6 * std::max(1.0, std::fabs(x[static_cast<std::size_t>(j)]));
      xp[static_cast<std::size_t>(j)] += step;
      xm[static_cast<std::size_t>(j)] -= step;
      std::vector<double> gp = gradient(xp);
      std::vector<double> gm = gradient(xm);
      for (int r = 0; r < dim; ++r) {
        out[static_cast<std::size_t>(r) * dim + j] = (gp[static_cast<std::size_t>(r)] - gm[static_cast<std::size_t>(r)]) / (2 * step);
      }
      xp[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)];
      xm[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)];
    }
    // Symmetrize.
    for (int r = 0; r < dim; ++r) {
      for (int c = r + 1; c < dim; ++c) {
        double v = 0.5 * (out[static_cast<std::size_t>(r) * dim + c] + out[static_cast<std::size_t>(c) * dim + r]);
        out[static_cast<std::size_t>(r) * dim + c] = v;
        out[static_cast<std::size_t>(c) * dim + r] = v;
      }
    }
    return out;
  }

  std::vector<double> q = full_values(x);
  const std::size_t ns = slots_.size();
  std::vector<double> vals(ns * ns, 0.0);
  // Node/weight pattern of each slot relative to integration node i.
  struct W {
    int node_delta;
    double weight;
  };
  auto slot_weights = [&](std::size_t a) {
    std::vector<W> w;
    switch (a / static_cast<std::size_t>(n)) {
      case 0: w = {{0, 1.0}}; break;
      case 1: w = {{1, 1.0 / h}, {0, -1.0 / h}}; break;
      case 2: w = {{-grid_.k, 1.0}}; break;
      default: w = {{-grid_.k + 1, 1.0 / h}, {-grid_.k, -1.0 / h}}; break;
    }
    return w;
  };

  Binding b;
  for (int i = grid_.k; i < grid_.last; ++i) {
    node_binding(q, i, b);
    for (std::size_t a = 0; a < ns; ++a) {
      for (std::size_t bb = a; bb < ns; ++bb) {
        const Expr& e = second_partials_[a][bb - a];
        double v = e.is_zero() ? 0.0 : eval(e, b);
        vals[a * ns + bb] = v;
        vals[bb * ns + a] = v;
      }
    }
    for (std::size_t a = 0; a < ns; ++a) {
      int comp_a = static_cast<int>(a) % n;
      for (const W& wa : slot_weights(a)) {
        int base_a = var_of_node_[static_cast<std::size_t>(i + wa.node_delta)];
        if (base_a < 0) continue;
        int row = base_a + comp_a;
        for (std::size_t bb = 0; bb < ns; ++bb) {
          double v = vals[a * ns + bb];
          if (v == 0.0) continue;
          int comp_b = static_cast<int>(bb) % n;
          for (const W& wb : slot_weights(bb)) {
            int base_b = var_of_node_[static_cast<std::size_t>(i + wb.node_delta)];
            if (base_b < 0) continue;
            out[static_cast<std::size_t>(row) * dim + base_b + comp_b] += h * v * wa.weight * wb.weight;
          }
        }
      }
    }
  }
  return out;
}

Trajectory DiscretizedObjective::to_trajectory(const std::vector<double>& x) const {
  Trajectory traj = make_trajectory(problem_, grid_.h);
  std::vector<double> q = full_values(x);
  for (int j = 0; j <= grid_.last; ++j) {
    for (int c = 1; c <= problem_.n; ++c) {
      traj.state(j, c) = q[static_cast<std::size_t>(j) * problem_.n + c - 1];
    }
  }
  return traj;
}

namespace {

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace

SolveReport solve(const DelayedVariationalProblem& p, const SolverConfig& cfg) {
  DiscretizedObjective obj(p, cfg.h);
  const int dim = obj.dimension();
  std::vector<double> x = obj.initial_guess();

  SolveReport report;
  if (dim == 0) {
    report.trajectory = obj.to_trajectory(x);
    report.objective = obj.objective(x);
    report.grad_inf_norm = 0.0;
    report.converged = true;
    return report;
  }

  double fx = obj.objective(x);
  int iter = 0;
  bool converged = false;
  std::vector<double> g = obj.gradient(x);

  while (iter < cfg.max_iter) {
    if (inf_norm(g) <= cfg.gtol) {
      converged = true;
      break;
    }
    ++iter;

    std::vector<double> hflat = obj.hessian(x);
    // hessian() is row-major but symmetric, so the column-major view is the
    // same matrix
    Eigen::Map<const Eigen::MatrixXd> H(hflat.data(), dim, dim);
    Eigen::Map<const Eigen::VectorXd> gv(g.data(), dim);

    double diag_scale = 1.0;
    for (int j = 0; j < dim; ++j) diag_scale = std::max(diag_scale, std::fabs(H(j, j)));

    bool stepped = false;
    double lambda = 0.0;
    for (int attempt = 0; attempt < 48 && !stepped; ++attempt) {
      Eigen::MatrixXd shifted = H;
      if (lambda > 0.0) shifted.diagonal().array() += lambda;
      Eigen::LLT<Eigen::MatrixXd> llt(shifted);
      if (llt.info() == Eigen::Success) {
        Eigen::VectorXd d = llt.solve(-gv);
        std::vector<double> trial(x);
        for (int j = 0; j < dim; ++j) trial[static_cast<std::size_t>(j)] += d(j);
        double ft = obj.objective(trial);
        if (ft <= fx) {
          x = std::move(trial);
          fx = ft;
          stepped = true;
          break;
        }
      }
      lambda = lambda == 0.0 ? 1e-10 * diag_scale : 2.0 * lambda;
    }

    if (!stepped) {
      // Armijo line search along the negative gradient.
      double gnorm = inf_norm(g);
      double alpha = 1.0 / std::max(1.0, gnorm);
      bool accepted = false;
      while (alpha > 1e-18) {
        std::vector<double> trial(x);
        for (int j = 0; j < dim; ++j) trial[static_cast<std::size_t>(j)] -= alpha * g[static_cast<std::size_t>(j)];
        double ft = obj.objective(trial);
        double decrease = 0.0;
        for (int j = 0; j < dim; ++j) decrease += g[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(j)];
        if (ft <= fx - 1e-4 * alpha * decrease) {
          x = std::move(trial);
          fx = ft;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;  // no usable descent direction left
    }

    g = obj.gradient(x);
  }

  if (!converged && inf_norm(g) <= cfg.gtol) converged = true;

  report.trajectory = obj.to_trajectory(x);
  report.objective = fx;
  report.grad_inf_norm = inf_norm(g);
  report.iterations = iter;
  report.converged = converged;
  return report;
}

}  // namespace delvar
