#pragma once

#include "padmm/types.hpp"

#include <Eigen/LU>
#include <Eigen/SparseCore>

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace padmm {

/// One additive objective term f_i : R^d -> R with its gradient.
///
/// When `residual` is set the term has least-squares structure,
/// f_i(x) = 0.5 * ||residual(x)||^2, and `residual_jacobian` must produce the
/// matching Jacobian. All callbacks must be pure: same input, same output, no
/// observable mutation.
struct ObjectiveTerm {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&)> residual;
  std::function<Matrix(const Vector&)> residual_jacobian;

  bool has_least_squares() const noexcept { return static_cast<bool>(residual); }

  /// The identically-zero term, carried with an empty (0-row) residual stack
  /// so blocks with no cost keep the least-squares view.
  static ObjectiveTerm zero();

  /// 0.5 * ||x - target||^2 with the natural residual view.
  static ObjectiveTerm squared_distance(Vector target, double weight = 1.0);
};

/// The discrete dynamics map phi : R^d -> R^d.
///
/// `jtprod(x, w)` returns grad phi(x)^T w; this is the only derivative the
/// core iteration needs. `jacobian` (dense) and `sparse_jacobian` are optional
/// extras consumed by least-squares subsolves; when absent, a dense Jacobian
/// can still be assembled from d transpose-products.
struct DynamicsMap {
  std::function<Vector(const Vector&)> value;
  std::function<Vector(const Vector&, const Vector&)> jtprod;
  std::function<Matrix(const Vector&)> jacobian;
  std::function<Eigen::SparseMatrix<double>(const Vector&)> sparse_jacobian;

  bool has_jacobian() const noexcept { return static_cast<bool>(jacobian) || static_cast<bool>(sparse_jacobian); }

  /// Full Jacobian at x: uses `jacobian`/`sparse_jacobian` when available,
  /// otherwise assembles row k as jtprod(x, e_k).
  Matrix dense_jacobian(const Vector& x) const;

  static DynamicsMap identity();
  static DynamicsMap linear(Matrix a);
};

enum class ConstraintShape {
  ExplicitForward,   ///< x_{j+1} = phi(x_j)
  SemiImplicit,      ///< A_j x_{j+1} = phi_j(x_j)
  ImplicitBackward,  ///< phi(x_{j+1}) = x_j
  Controlled,        ///< x_{j+1} = phi(x_j, u_j)
};

/// One transition of the semi-implicit shape: A_j x_{j+1} = phi_j(x_j).
/// The left-hand matrix must be invertible; a dense factorization is built at
/// problem construction for d <= 512 and an iterative solver is used above.
struct SemiImplicitStep {
  Matrix lhs;
  DynamicsMap map;
};

/// The dynamics-constrained problem:
///   min sum_{i=0}^{n} f_i(x_i)  subject to n transition constraints in one of
/// the explicit / semi-implicit / implicit shapes. Controlled problems live in
/// `ControlledProblem`. Immutable after construction and safe to share across
/// threads; all callbacks must be reentrant.
class DynamicsProblem {
 public:
  static DynamicsProblem explicit_forward(int n, int d, std::vector<ObjectiveTerm> terms, DynamicsMap dynamics);
  static DynamicsProblem implicit_backward(int n, int d, std::vector<ObjectiveTerm> terms, DynamicsMap dynamics);
  /// `condition_cap` bounds the accepted condition-number estimate of each A_j.
  static DynamicsProblem semi_implicit(int n, int d, std::vector<ObjectiveTerm> terms,
                                       std::vector<SemiImplicitStep> steps, double condition_cap = 1e12);

  int transition_count() const noexcept { return n_; }  ///< n
  int block_count() const noexcept { return n_ + 1; }   ///< n + 1
  int dimension() const noexcept { return d_; }         ///< d
  ConstraintShape shape() const noexcept { return shape_; }

  const ObjectiveTerm& term(int i) const { return terms_[static_cast<std::size_t>(i)]; }

  /// The shared map for the explicit and implicit shapes.
  const DynamicsMap& dynamics() const;
  /// The per-step map: phi_j for the semi-implicit shape, the shared map otherwise.
  const DynamicsMap& step_map(int j) const;
  /// A_j of the semi-implicit shape.
  const Matrix& step_matrix(int j) const;
  /// Solves A_j y = rhs.
  Vector solve_step_system(int j, const Vector& rhs) const;

  /// Throws DimensionError naming the offending block when x does not conform.
  void check_trajectory(const Trajectory& x) const;
  void check_duals(const DualVariables& lambda) const;

 private:
  DynamicsProblem() = default;

  struct StepSolver;  // factorization handle, one per semi-implicit step

  int n_ = 0;
  int d_ = 0;
  ConstraintShape shape_ = ConstraintShape::ExplicitForward;
  std::vector<ObjectiveTerm> terms_;
  DynamicsMap dynamics_;
  std::vector<SemiImplicitStep> steps_;
  std::vector<std::shared_ptr<const StepSolver>> step_solvers_;
};

/// Controlled dynamics phi(x, u) with transpose-products in both arguments.
struct ControlledDynamicsMap {
  std::function<Vector(const Vector&, const Vector&)> value;
  std::function<Vector(const Vector&, const Vector&, const Vector&)> jtprod_state;    ///< grad_x phi(x,u)^T w
  std::function<Vector(const Vector&, const Vector&, const Vector&)> jtprod_control;  ///< grad_u phi(x,u)^T w
};

/// One objective term f_i(x_i, u_i) of the controlled problem.
struct ControlledObjectiveTerm {
  std::function<double(const Vector&, const Vector&)> value;
  std::function<Vector(const Vector&, const Vector&)> grad_state;
  std::function<Vector(const Vector&, const Vector&)> grad_control;

  static ControlledObjectiveTerm zero();
};

/// Optimal-control shape: min sum f_i(x_i, u_i) s.t. x_{j+1} = phi(x_j, u_j),
/// x_0 fixed, controls constrained to an admissible set via a projection
/// callback (must be idempotent). Block x_0 is carried in trajectories but is
/// never a decision variable.
class ControlledProblem {
 public:
  ControlledProblem(int n, int state_dim, int control_dim, std::vector<ControlledObjectiveTerm> terms,
                    ControlledDynamicsMap dynamics, Vector initial_state,
                    std::function<Vector(const Vector&)> project_control);

  int transition_count() const noexcept { return n_; }
  int block_count() const noexcept { return n_ + 1; }
  int state_dimension() const noexcept { return state_dim_; }
  int control_dimension() const noexcept { return control_dim_; }

  const ControlledObjectiveTerm& term(int i) const { return terms_[static_cast<std::size_t>(i)]; }
  const ControlledDynamicsMap& dynamics() const noexcept { return dynamics_; }
  const Vector& initial_state() const noexcept { return initial_state_; }
  bool has_projection() const noexcept { return static_cast<bool>(project_control_); }
  Vector project_control(const Vector& u) const;

  void check_trajectory(const Trajectory& x) const;
  void check_controls(const ControlSequence& u) const;
  void check_duals(const DualVariables& lambda) const;

 private:
  int n_;
  int state_dim_;
  int control_dim_;
  std::vector<ControlledObjectiveTerm> terms_;
  ControlledDynamicsMap dynamics_;
  Vector initial_state_;
  std::function<Vector(const Vector&)> project_control_;
};

/// sum_i f_i(x_i).
double evaluate_objective(const DynamicsProblem& problem, const Trajectory& x);
double evaluate_objective(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u);

/// The residual of constraint j in the shape-appropriate form (see
/// ConstraintShape). Zero residual means the transition is satisfied.
Vector constraint_residual(const DynamicsProblem& problem, const Trajectory& x, int j);
std::vector<Vector> constraint_residuals(const DynamicsProblem& problem, const Trajectory& x);

Vector constraint_residual(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u, int j);
std::vector<Vector> constraint_residuals(const ControlledProblem& problem, const Trajectory& x,
                                         const ControlSequence& u);

/// Rolls the dynamics forward from x0. Explicit and semi-implicit shapes only;
/// the implicit shape has no forward rollout (see the per-step Newton solver
/// in the experiments module). Throws NonFiniteError with the step index if
/// the dynamics blow up.
Trajectory feasibility_rollout(const DynamicsProblem& problem, const Vector& x0);

}  // namespace padmm
