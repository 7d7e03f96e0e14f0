#pragma once

#include "padmm/types.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <string>

namespace padmm {

/// A self-contained smooth minimization problem over R^d, produced by block
/// subproblem assembly. `value`/`gradient` are always present. When the block
/// objective has least-squares structure the stacked residual view satisfies
/// value(x) = 0.5 * ||residual(x)||^2 with `residual_jacobian` the matching
/// Jacobian; `sparse_residual_jacobian`, when set, returns the same matrix in
/// sparse form for banded blocks.
struct SubproblemSpec {
  int dimension = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&)> residual;
  std::function<Matrix(const Vector&)> residual_jacobian;
  std::function<Eigen::SparseMatrix<double>(const Vector&)> sparse_residual_jacobian;
  Vector warm_start;
  double inner_tolerance = 1e-8;  ///< absolute gradient-norm target
  int iteration_cap = 100;

  bool has_least_squares() const noexcept { return static_cast<bool>(residual); }
};

enum class SubsolveStatus {
  GradientTolerance,  ///< ||g|| <= inner tolerance
  SimplexTolerance,   ///< simplex diameter below tolerance (Nelder-Mead)
  IterationCap,
  Stalled,            ///< step collapsed below floating-point resolution
  NonFiniteEvaluation ///< a trial evaluation went non-finite; last good iterate returned
};

/// Result of one block subproblem solve. The descent contract
/// `value <= value(warm start)` holds for every solver in this module.
struct SubsolveReport {
  Vector solution;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  SubsolveStatus status = SubsolveStatus::IterationCap;
};

const char* to_string(SubsolveStatus s);

/// Damped Gauss-Newton with Marquardt damping: mu starts at 1e-3 times the
/// largest diagonal of J^T J, grows tenfold on rejection and shrinks tenfold
/// on acceptance (any positive actual reduction accepts). Requires the
/// residual view.
SubsolveReport levenberg_marquardt(const SubproblemSpec& spec);

/// Gradient descent with Armijo backtracking (c = 1e-4, halving) for generic
/// smooth blocks.
SubsolveReport descent_fallback(const SubproblemSpec& spec);

/// Derivative-free simplex search (reflection / expansion / contraction /
/// shrink) for low dimension. Terminates when the simplex diameter falls
/// below the spec's inner tolerance. Returns the best vertex only if it beats
/// the warm start.
SubsolveReport nelder_mead(const SubproblemSpec& spec, int dimension_cap = 16);

/// Projected gradient descent over a convex admissible set; used by the
/// control blocks. The warm start must already be admissible.
SubsolveReport projected_descent(const SubproblemSpec& spec, const std::function<Vector(const Vector&)>& project);

enum class SubsolverKind { Auto, LevenbergMarquardt, DescentFallback, NelderMead };

struct SubsolverOptions {
  SubsolverKind kind = SubsolverKind::Auto;
  /// Per-block absolute tolerance: inner_tol_rel * (1 + ||g(warm start)||).
  double inner_tol_rel = 1e-8;
  int iteration_cap = 100;
  int nelder_mead_dimension_cap = 16;
};

/// Dispatches to the configured solver; Auto picks Levenberg-Marquardt when
/// the residual view is present and the descent fallback otherwise.
SubsolveReport solve_subproblem(const SubproblemSpec& spec, const SubsolverOptions& options);

}  // namespace padmm
