#pragma once

#include "padmm/problem.hpp"

#include <string>
#include <vector>

namespace padmm {

/// Forward states v_0..v_n and the backward multipliers w_n..w_0 of one
/// gradient evaluation of the dynamics-reduced objective.
struct AdjointWorkspace {
  Trajectory forward;
  std::vector<Vector> adjoint;  // w_0..w_n, stored in block order
};

/// F(v0) = sum_i f_i(v_i) with v_i produced by the forward rollout. Explicit
/// shape only. Throws NonFiniteError with the step index when the rollout
/// blows up.
double reduced_objective(const DynamicsProblem& problem, const Vector& v0);

/// Gradient of the reduced objective by one forward and one backward pass:
/// w_n = grad f_n(v_n), then w_{j-1} = grad phi(v_{j-1})^T w_j + grad
/// f_{j-1}(v_{j-1}) down to w_0, which is the gradient. (The recursion adds
/// the local cost gradient at step j-1; this is the index choice that matches
/// central finite differences of the rolled-out objective.)
Vector adjoint_gradient(const DynamicsProblem& problem, const Vector& v0);

/// Same computation with the full workspace exposed.
AdjointWorkspace adjoint_workspace(const DynamicsProblem& problem, const Vector& v0);

struct DriverOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-8;
  int restart_period = 0;  ///< 0 means d * (n + 1)
  double armijo_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int memory = 10;  ///< L-BFGS pair history
  int max_line_search_steps = 60;
};

struct DriverTraceEntry {
  int iteration = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
  double step_size = 0.0;
};

struct DriverResult {
  Vector solution;
  double objective = 0.0;
  double gradient_norm = 0.0;
  std::vector<DriverTraceEntry> trace;
  std::string status;
};

/// Nonlinear conjugate gradient on the reduced objective with the
/// nonnegative Polak-Ribiere beta, Armijo backtracking, and periodic
/// restarts (every restart_period steps or whenever the direction loses
/// descent). A failed line search restarts once along steepest descent and
/// terminates with status "line-search-failure" if it fails again.
DriverResult polak_ribiere_cg(const DynamicsProblem& problem, const Vector& v0_init, const DriverOptions& options);

/// Limited-memory BFGS with the two-loop recursion and an Armijo-Wolfe line
/// search; pairs failing the curvature condition are skipped.
DriverResult lbfgs(const DynamicsProblem& problem, const Vector& v0_init, const DriverOptions& options);

}  // namespace padmm
