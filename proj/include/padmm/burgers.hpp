#pragma once

#include "padmm/admm.hpp"
#include "padmm/problem.hpp"

#include <Eigen/SparseCore>

namespace padmm::burgers {

/// Discretization of the viscous conservation law on (0, pi) with Dirichlet
/// endpoints pinned to zero: `cells` intervals give grid_points = cells + 1
/// public grid values. Solvers work on the interior unknowns only
/// (grid_points - 2); pad/strip below convert between the two layouts.
struct BurgersConfig {
  double viscosity = 0.005;
  double horizon = 2.0;
  int cells = 100;  ///< m
  double dt = 0.1;

  int grid_points() const { return cells + 1; }       ///< d = m + 1, with pins
  int interior_points() const { return cells - 1; }   ///< unknowns per block
  double dx() const;                                  ///< pi / m
  int steps() const;                                  ///< n = horizon / dt
  void validate() const;
};

/// One explicit step with the dissipative two-point flux plus viscosity,
/// written in the expanded stencil form. Full-grid vectors; endpoints stay 0.
Vector lf_explicit_step(const BurgersConfig& config, const Vector& u);

/// The same step assembled from the numerical flux differences; equals the
/// expanded form to machine precision (kept as a transcription check).
Vector lf_explicit_step_flux_form(const BurgersConfig& config, const Vector& u);

/// The implicit one-step map phi(w) such that the backward scheme reads
/// phi(u_{i+1}) = u_i. Full-grid vectors; endpoint rows are the identity.
Vector lf_implicit_map(const BurgersConfig& config, const Vector& w);

/// grad phi(w)^T v for the implicit map (tridiagonal structure), full grid.
Vector lf_implicit_jtprod(const BurgersConfig& config, const Vector& w, const Vector& v);

/// Tridiagonal Jacobian of the implicit map, full grid.
Eigen::SparseMatrix<double> lf_implicit_jacobian(const BurgersConfig& config, const Vector& w);

/// sin(x_q) on the grid with endpoints set exactly to zero.
Vector sine_initial_profile(const BurgersConfig& config);

/// Solves phi(u_{i+1}) = u_i step by step with damped Newton iterations on
/// the tridiagonal system (direct banded solves) to residual 1e-12 in the
/// max norm; the reference solution for the optimization route. Full-grid
/// blocks in, full-grid trajectory out.
Trajectory newton_implicit_rollout(const BurgersConfig& config, const Vector& u0);

/// Rolls the explicit scheme forward; full-grid trajectory.
Trajectory explicit_rollout(const BurgersConfig& config, const Vector& u0);

/// The implicit scheme as a constrained minimization over the interior
/// unknowns: objective 0.5||u_0 - u0_target||^2 on block 0, zero elsewhere,
/// backward-shape constraints through the implicit map. The map carries the
/// sparse tridiagonal Jacobian so block subproblems solve banded systems.
DynamicsProblem make_implicit_problem(const BurgersConfig& config, const Vector& u0_full);

/// The experiment's solver profile: rho_j = 0.1, eta_i = 2, zero-started.
AdmmParams default_implicit_params(const BurgersConfig& config);

/// Interior <-> full-grid layout helpers.
Vector strip_pins(const Vector& full);
Vector pad_pins(const Vector& interior);
Trajectory pad_pins(const Trajectory& interior);

/// sqrt(dx * sum (u - v)^2) over the full grid.
double l2_distance(const BurgersConfig& config, const Vector& u, const Vector& v);

}  // namespace padmm::burgers
