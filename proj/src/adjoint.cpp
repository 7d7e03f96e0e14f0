#include "padmm/adjoint.hpp"

#include <cmath>
#include <limits>

namespace padmm {

namespace {

void require_explicit(const DynamicsProblem& problem, const char* who) {
  if (problem.shape() != ConstraintShape::ExplicitForward) {
    throw ParameterError(std::string(who) + ": requires the explicit-forward shape");
  }
}

// Rollout value that reports blowups as +inf instead of throwing; the line
// searches treat such trial points as rejected.
double guarded_objective(const DynamicsProblem& problem, const Vector& v0) {
  try {
    return reduced_objective(problem, v0);
  } catch (const NonFiniteError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

double reduced_objective(const DynamicsProblem& problem, const Vector& v0) {
  require_explicit(problem, "reduced_objective");
  const Trajectory v = feasibility_rollout(problem, v0);
  double total = 0.0;
  for (int i = 0; i <= problem.transition_count(); ++i) total += problem.term(i).value(v[i]);
  if (!std::isfinite(total)) {
    throw NonFiniteError("reduced_objective: non-finite objective after rollout", problem.transition_count());
  }
  return total;
}

AdjointWorkspace adjoint_workspace(const DynamicsProblem& problem, const Vector& v0) {
  require_explicit(problem, "adjoint_gradient");
  const int n = problem.transition_count();
  AdjointWorkspace ws;
  ws.forward = feasibility_rollout(problem, v0);
  ws.adjoint.assign(static_cast<std::size_t>(n) + 1, Vector());
  ws.adjoint[static_cast<std::size_t>(n)] = problem.term(n).gradient(ws.forward[n]);
  for (int j = n; j >= 1; --j) {
    ws.adjoint[static_cast<std::size_t>(j - 1)] =
        problem.dynamics().jtprod(ws.forward[j - 1], ws.adjoint[static_cast<std::size_t>(j)]) +
        problem.term(j - 1).gradient(ws.forward[j - 1]);
  }
  return ws;
}

Vector adjoint_gradient(const DynamicsProblem& problem, const Vector& v0) {
  return adjoint_workspace(problem, v0).adjoint.front();
}

namespace {

struct LineSearchResult {
  double step = 0.0;
  double value = 0.0;
  bool ok = false;
};

LineSearchResult armijo_backtracking(const DynamicsProblem& problem, const Vector& x, const Vector& direction,
                                     double value, double directional, double t0, double c1, int max_steps) {
  double t = t0;
  for (int s = 0; s < max_steps; ++s) {
    const double trial = guarded_objective(problem, x + t * direction);
    if (trial <= value + c1 * t * directional) return {t, trial, true};
    t *= 0.5;
  }
  return {};
}

}  // namespace

DriverResult polak_ribiere_cg(const DynamicsProblem& problem, const Vector& v0_init, const DriverOptions& options) {
  require_explicit(problem, "polak_ribiere_cg");
  const int restart_period =
      options.restart_period > 0 ? options.restart_period
                                 : problem.dimension() * (problem.transition_count() + 1);

  DriverResult result;
  Vector x = v0_init;
  double value = guarded_objective(problem, x);
  if (!std::isfinite(value)) throw NonFiniteError("polak_ribiere_cg: non-finite objective at the start", 0);
  Vector g = adjoint_gradient(problem, x);
  Vector direction = -g;
  double last_step = 1.0;
  int since_restart = 0;
  result.status = "max-iterations";

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (g.norm() <= options.gradient_tol) {
      result.status = "gradient-tolerance";
      break;
    }
    if (since_restart >= restart_period || direction.dot(g) >= 0.0) {
      direction = -g;
      since_restart = 0;
    }
    double directional = direction.dot(g);
    LineSearchResult ls = armijo_backtracking(problem, x, direction, value, directional, 2.0 * last_step,
                                              options.armijo_c1, options.max_line_search_steps);
    if (!ls.ok && since_restart != 0) {
      // One restart along steepest descent before giving up.
      direction = -g;
      since_restart = 0;
      directional = direction.dot(g);
      ls = armijo_backtracking(problem, x, direction, value, directional, 1.0, options.armijo_c1,
                               options.max_line_search_steps);
    }
    if (!ls.ok) {
      result.status = "line-search-failure";
      break;
    }
    x += ls.step * direction;
    value = ls.value;
    last_step = ls.step;
    ++since_restart;

    const Vector g_next = adjoint_gradient(problem, x);
    const double beta = std::max(0.0, g_next.dot(g_next - g) / g.dot(g));
    direction = -g_next + beta * direction;
    g = g_next;
    result.trace.push_back({iter + 1, value, g.norm(), ls.step});
  }

  result.solution = std::move(x);
  result.objective = value;
  result.gradient_norm = g.norm();
  if (result.gradient_norm <= options.gradient_tol) result.status = "gradient-tolerance";
  return result;
}

DriverResult lbfgs(const DynamicsProblem& problem, const Vector& v0_init, const DriverOptions& options) {
  require_explicit(problem, "lbfgs");
  DriverResult result;
  Vector x = v0_init;
  double value = guarded_objective(problem, x);
  if (!std::isfinite(value)) throw NonFiniteError("lbfgs: non-finite objective at the start", 0);
  Vector g = adjoint_gradient(problem, x);
  result.status = "max-iterations";

  std::vector<Vector> s_hist, y_hist;
  std::vector<double> rho_hist;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (g.norm() <= options.gradient_tol) {
      result.status = "gradient-tolerance";
      break;
    }

    // Two-loop recursion.
    Vector q = g;
    const int m = static_cast<int>(s_hist.size());
    std::vector<double> alpha(static_cast<std::size_t>(m));
    for (int k = m - 1; k >= 0; --k) {
      alpha[static_cast<std::size_t>(k)] = rho_hist[static_cast<std::size_t>(k)] * s_hist[static_cast<std::size_t>(k)].dot(q);
      q -= alpha[static_cast<std::size_t>(k)] * y_hist[static_cast<std::size_t>(k)];
    }
    if (m > 0) {
      const Vector& s = s_hist.back();
      const Vector& y = y_hist.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (int k = 0; k < m; ++k) {
      const double beta = rho_hist[static_cast<std::size_t>(k)] * y_hist[static_cast<std::size_t>(k)].dot(q);
      q += (alpha[static_cast<std::size_t>(k)] - beta) * s_hist[static_cast<std::size_t>(k)];
    }
    Vector direction = -q;
    double directional = direction.dot(g);
    if (directional >= 0.0) {
      direction = -g;
      directional = direction.dot(g);
    }

    // Armijo-Wolfe bisection.
    double lo = 0.0, hi = std::numeric_limits<double>::infinity(), t = 1.0;
    bool accepted = false;
    double trial_value = value;
    Vector g_trial;
    for (int s = 0; s < options.max_line_search_steps; ++s) {
      const Vector x_trial = x + t * direction;
      trial_value = guarded_objective(problem, x_trial);
      if (!(trial_value <= value + options.armijo_c1 * t * directional)) {
        hi = t;
        t = 0.5 * (lo + hi);
        continue;
      }
      g_trial = adjoint_gradient(problem, x_trial);
      if (g_trial.dot(direction) < options.wolfe_c2 * directional) {
        lo = t;
        t = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * t;
        continue;
      }
      accepted = true;
      break;
    }
    if (!accepted) {
      result.status = "line-search-failure";
      break;
    }

    const Vector x_next = x + t * direction;
    const Vector s_vec = x_next - x;
    const Vector y_vec = g_trial - g;
    x = x_next;
    value = trial_value;
    g = g_trial;
    result.trace.push_back({iter + 1, value, g.norm(), t});

    const double sy = s_vec.dot(y_vec);
    if (sy > 1e-10 * s_vec.norm() * y_vec.norm()) {  // curvature condition; skip the pair otherwise
      s_hist.push_back(s_vec);
      y_hist.push_back(y_vec);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }
  }

  result.solution = std::move(x);
  result.objective = value;
  result.gradient_norm = g.norm();
  if (result.gradient_norm <= options.gradient_tol) result.status = "gradient-tolerance";
  return result;
}

}  // namespace padmm
