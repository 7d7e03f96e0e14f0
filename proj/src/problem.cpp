#include "padmm/problem.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <sstream>
#include <utility>

namespace padmm {

namespace {

std::string block_msg(const char* what, int index, int expected, int got) {
  std::ostringstream os;
  os << what << " at block " << index << ": expected dimension " << expected << ", got " << got;
  return os.str();
}

}  // namespace

ObjectiveTerm ObjectiveTerm::zero() {
  ObjectiveTerm t;
  t.value = [](const Vector&) { return 0.0; };
  t.gradient = [](const Vector& x) { return Vector::Zero(x.size()).eval(); };
  t.residual = [](const Vector&) { return Vector(0); };
  t.residual_jacobian = [](const Vector& x) { return Matrix::Zero(0, x.size()).eval(); };
  return t;
}

ObjectiveTerm ObjectiveTerm::squared_distance(Vector target, double weight) {
  ObjectiveTerm t;
  const double w = std::sqrt(weight);
  t.value = [target, weight](const Vector& x) { return 0.5 * weight * (x - target).squaredNorm(); };
  t.gradient = [target, weight](const Vector& x) { return (weight * (x - target)).eval(); };
  t.residual = [target, w](const Vector& x) { return (w * (x - target)).eval(); };
  t.residual_jacobian = [w](const Vector& x) { return (w * Matrix::Identity(x.size(), x.size())).eval(); };
  return t;
}

Matrix DynamicsMap::dense_jacobian(const Vector& x) const {
  if (jacobian) return jacobian(x);
  if (sparse_jacobian) return Matrix(sparse_jacobian(x));
  const int d_out = static_cast<int>(value(x).size());
  const int d_in = static_cast<int>(x.size());
  Matrix j(d_out, d_in);
  Vector e = Vector::Zero(d_out);
  for (int k = 0; k < d_out; ++k) {
    e[k] = 1.0;
    j.row(k) = jtprod(x, e).transpose();  // grad phi^T e_k = row k of grad phi
    e[k] = 0.0;
  }
  return j;
}

DynamicsMap DynamicsMap::identity() {
  DynamicsMap m;
  m.value = [](const Vector& x) { return x; };
  m.jtprod = [](const Vector&, const Vector& w) { return w; };
  m.jacobian = [](const Vector& x) { return Matrix::Identity(x.size(), x.size()).eval(); };
  return m;
}

DynamicsMap DynamicsMap::linear(Matrix a) {
  DynamicsMap m;
  const auto mat = std::make_shared<const Matrix>(std::move(a));
  m.value = [mat](const Vector& x) { return (*mat * x).eval(); };
  m.jtprod = [mat](const Vector&, const Vector& w) { return (mat->transpose() * w).eval(); };
  m.jacobian = [mat](const Vector&) { return *mat; };
  return m;
}

// Per-step linear-solver handle: dense factorization for d <= 512, BiCGSTAB
// above. Built once; problems are immutable afterwards.
struct DynamicsProblem::StepSolver {
  static constexpr int kDenseLimit = 512;

  explicit StepSolver(const Matrix& a) : dense_ok(a.rows() <= kDenseLimit) {
    if (dense_ok) {
      lu.compute(a);
    } else {
      iterative.compute(a);
    }
  }

  Vector solve(const Vector& rhs) const { return dense_ok ? Vector(lu.solve(rhs)) : Vector(iterative.solve(rhs)); }

  double condition_estimate() const {
    if (!dense_ok) return 0.0;  // not estimated for the iterative path
    const double rc = lu.rcond();
    return rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  }

  bool dense_ok;
  Eigen::PartialPivLU<Matrix> lu;
  Eigen::BiCGSTAB<Matrix> iterative;
};

namespace {

void validate_terms(int n, const std::vector<ObjectiveTerm>& terms) {
  if (static_cast<int>(terms.size()) != n + 1) {
    throw DimensionError("DynamicsProblem: need n+1 objective terms, got " + std::to_string(terms.size()),
                         static_cast<int>(terms.size()));
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (!terms[i].value || !terms[i].gradient) {
      throw ParameterError("DynamicsProblem: objective term " + std::to_string(i) +
                           " is missing its value or gradient callback");
    }
  }
}

}  // namespace

DynamicsProblem DynamicsProblem::explicit_forward(int n, int d, std::vector<ObjectiveTerm> terms,
                                                  DynamicsMap dynamics) {
  if (n < 0 || d < 1) throw ParameterError("DynamicsProblem: need n >= 0 and d >= 1");
  validate_terms(n, terms);
  if (!dynamics.value || !dynamics.jtprod) {
    throw ParameterError("DynamicsProblem: dynamics map needs value and jtprod callbacks");
  }
  DynamicsProblem p;
  p.n_ = n;
  p.d_ = d;
  p.shape_ = ConstraintShape::ExplicitForward;
  p.terms_ = std::move(terms);
  p.dynamics_ = std::move(dynamics);
  return p;
}

DynamicsProblem DynamicsProblem::implicit_backward(int n, int d, std::vector<ObjectiveTerm> terms,
                                                   DynamicsMap dynamics) {
  DynamicsProblem p = explicit_forward(n, d, std::move(terms), std::move(dynamics));
  p.shape_ = ConstraintShape::ImplicitBackward;
  return p;
}

DynamicsProblem DynamicsProblem::semi_implicit(int n, int d, std::vector<ObjectiveTerm> terms,
                                               std::vector<SemiImplicitStep> steps, double condition_cap) {
  if (n < 0 || d < 1) throw ParameterError("DynamicsProblem: need n >= 0 and d >= 1");
  validate_terms(n, terms);
  if (static_cast<int>(steps.size()) != n) {
    throw DimensionError("DynamicsProblem: need n semi-implicit steps", static_cast<int>(steps.size()));
  }
  DynamicsProblem p;
  p.n_ = n;
  p.d_ = d;
  p.shape_ = ConstraintShape::SemiImplicit;
  p.terms_ = std::move(terms);
  p.steps_ = std::move(steps);
  p.step_solvers_.reserve(p.steps_.size());
  for (int j = 0; j < n; ++j) {
    const SemiImplicitStep& s = p.steps_[static_cast<std::size_t>(j)];
    if (s.lhs.rows() != d || s.lhs.cols() != d) {
      throw DimensionError("SemiImplicitStep: A_j must be d x d", j);
    }
    if (!s.map.value || !s.map.jtprod) {
      throw ParameterError("SemiImplicitStep: map " + std::to_string(j) + " needs value and jtprod callbacks");
    }
    auto solver = std::make_shared<const StepSolver>(s.lhs);
    if (solver->dense_ok && solver->condition_estimate() > condition_cap) {
      throw ParameterError("SemiImplicitStep: A_" + std::to_string(j) + " condition estimate " +
                           std::to_string(solver->condition_estimate()) + " exceeds the cap");
    }
    p.step_solvers_.push_back(std::move(solver));
  }
  return p;
}

const DynamicsMap& DynamicsProblem::dynamics() const {
  if (shape_ == ConstraintShape::SemiImplicit) {
    throw ParameterError("DynamicsProblem: the semi-implicit shape has per-step maps; use step_map(j)");
  }
  return dynamics_;
}

const DynamicsMap& DynamicsProblem::step_map(int j) const {
  if (shape_ == ConstraintShape::SemiImplicit) return steps_[static_cast<std::size_t>(j)].map;
  return dynamics_;
}

const Matrix& DynamicsProblem::step_matrix(int j) const {
  if (shape_ != ConstraintShape::SemiImplicit) {
    throw ParameterError("DynamicsProblem: step matrices exist only for the semi-implicit shape");
  }
  return steps_[static_cast<std::size_t>(j)].lhs;
}

Vector DynamicsProblem::solve_step_system(int j, const Vector& rhs) const {
  if (shape_ != ConstraintShape::SemiImplicit) {
    throw ParameterError("DynamicsProblem: step systems exist only for the semi-implicit shape");
  }
  return step_solvers_[static_cast<std::size_t>(j)]->solve(rhs);
}

void DynamicsProblem::check_trajectory(const Trajectory& x) const {
  if (x.count() != block_count()) {
    throw DimensionError("trajectory has " + std::to_string(x.count()) + " blocks, expected " +
                             std::to_string(block_count()),
                         x.count());
  }
  for (int i = 0; i < x.count(); ++i) {
    if (x[i].size() != d_) throw DimensionError(block_msg("trajectory", i, d_, static_cast<int>(x[i].size())), i);
  }
}

void DynamicsProblem::check_duals(const DualVariables& lambda) const {
  if (lambda.count() != n_) {
    throw DimensionError("dual variables have " + std::to_string(lambda.count()) + " blocks, expected " +
                             std::to_string(n_),
                         lambda.count());
  }
  for (int j = 0; j < lambda.count(); ++j) {
    if (lambda[j].size() != d_) {
      throw DimensionError(block_msg("dual variables", j, d_, static_cast<int>(lambda[j].size())), j);
    }
  }
}

ControlledObjectiveTerm ControlledObjectiveTerm::zero() {
  ControlledObjectiveTerm t;
  t.value = [](const Vector&, const Vector&) { return 0.0; };
  t.grad_state = [](const Vector& x, const Vector&) { return Vector::Zero(x.size()).eval(); };
  t.grad_control = [](const Vector&, const Vector& u) { return Vector::Zero(u.size()).eval(); };
  return t;
}

ControlledProblem::ControlledProblem(int n, int state_dim, int control_dim,
                                     std::vector<ControlledObjectiveTerm> terms, ControlledDynamicsMap dynamics,
                                     Vector initial_state, std::function<Vector(const Vector&)> project_control)
    : n_(n),
      state_dim_(state_dim),
      control_dim_(control_dim),
      terms_(std::move(terms)),
      dynamics_(std::move(dynamics)),
      initial_state_(std::move(initial_state)),
      project_control_(std::move(project_control)) {
  if (n_ < 1 || state_dim_ < 1 || control_dim_ < 1) {
    throw ParameterError("ControlledProblem: need n >= 1 and positive dimensions");
  }
  if (static_cast<int>(terms_.size()) != n_ + 1) {
    throw DimensionError("ControlledProblem: need n+1 objective terms", static_cast<int>(terms_.size()));
  }
  if (initial_state_.size() != state_dim_) {
    throw DimensionError("ControlledProblem: initial state has wrong dimension", 0);
  }
  if (!dynamics_.value || !dynamics_.jtprod_state || !dynamics_.jtprod_control) {
    throw ParameterError("ControlledProblem: dynamics map needs value and both jtprod callbacks");
  }
}

Vector ControlledProblem::project_control(const Vector& u) const {
  if (!project_control_) throw ConfigError("ControlledProblem: admissible-control projection callback missing");
  return project_control_(u);
}

void ControlledProblem::check_trajectory(const Trajectory& x) const {
  if (x.count() != block_count()) {
    throw DimensionError("controlled trajectory has wrong block count", x.count());
  }
  for (int i = 0; i < x.count(); ++i) {
    if (x[i].size() != state_dim_) {
      throw DimensionError(block_msg("controlled trajectory", i, state_dim_, static_cast<int>(x[i].size())), i);
    }
  }
}

void ControlledProblem::check_controls(const ControlSequence& u) const {
  if (u.count() != block_count()) throw DimensionError("control sequence has wrong block count", u.count());
  for (int q = 0; q < u.count(); ++q) {
    if (u[q].size() != control_dim_) {
      throw DimensionError(block_msg("control sequence", q, control_dim_, static_cast<int>(u[q].size())), q);
    }
  }
}

void ControlledProblem::check_duals(const DualVariables& lambda) const {
  if (lambda.count() != n_) throw DimensionError("controlled duals have wrong block count", lambda.count());
  for (int j = 0; j < lambda.count(); ++j) {
    if (lambda[j].size() != state_dim_) {
      throw DimensionError(block_msg("controlled duals", j, state_dim_, static_cast<int>(lambda[j].size())), j);
    }
  }
}

double evaluate_objective(const DynamicsProblem& problem, const Trajectory& x) {
  problem.check_trajectory(x);
  double total = 0.0;
  for (int i = 0; i <= problem.transition_count(); ++i) total += problem.term(i).value(x[i]);
  return total;
}

double evaluate_objective(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u) {
  problem.check_trajectory(x);
  problem.check_controls(u);
  double total = 0.0;
  for (int i = 0; i <= problem.transition_count(); ++i) total += problem.term(i).value(x[i], u[i]);
  return total;
}

Vector constraint_residual(const DynamicsProblem& problem, const Trajectory& x, int j) {
  switch (problem.shape()) {
    case ConstraintShape::ExplicitForward:
      return x[j + 1] - problem.step_map(j).value(x[j]);
    case ConstraintShape::SemiImplicit:
      return problem.step_matrix(j) * x[j + 1] - problem.step_map(j).value(x[j]);
    case ConstraintShape::ImplicitBackward:
      return problem.dynamics().value(x[j + 1]) - x[j];
    case ConstraintShape::Controlled:
      throw ParameterError("constraint_residual: controlled problems need the control argument");
  }
  throw ParameterError("constraint_residual: unknown shape");
}

std::vector<Vector> constraint_residuals(const DynamicsProblem& problem, const Trajectory& x) {
  problem.check_trajectory(x);
  std::vector<Vector> r;
  r.reserve(static_cast<std::size_t>(problem.transition_count()));
  for (int j = 0; j < problem.transition_count(); ++j) r.push_back(constraint_residual(problem, x, j));
  return r;
}

Vector constraint_residual(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u, int j) {
  return x[j + 1] - problem.dynamics().value(x[j], u[j]);
}

std::vector<Vector> constraint_residuals(const ControlledProblem& problem, const Trajectory& x,
                                         const ControlSequence& u) {
  problem.check_trajectory(x);
  problem.check_controls(u);
  std::vector<Vector> r;
  r.reserve(static_cast<std::size_t>(problem.transition_count()));
  for (int j = 0; j < problem.transition_count(); ++j) r.push_back(constraint_residual(problem, x, u, j));
  return r;
}

Trajectory feasibility_rollout(const DynamicsProblem& problem, const Vector& x0) {
  if (problem.shape() == ConstraintShape::ImplicitBackward) {
    throw SolveError("feasibility_rollout: the implicit shape rolls out backwards; use a per-step Newton solve");
  }
  if (x0.size() != problem.dimension()) {
    throw DimensionError("feasibility_rollout: x0 has wrong dimension", 0);
  }
  Trajectory x(problem.block_count(), problem.dimension());
  x[0] = x0;
  for (int j = 0; j < problem.transition_count(); ++j) {
    const Vector rhs = problem.step_map(j).value(x[j]);
    x[j + 1] = problem.shape() == ConstraintShape::SemiImplicit ? problem.solve_step_system(j, rhs) : rhs;
    if (!x[j + 1].allFinite()) {
      throw NonFiniteError("feasibility_rollout: non-finite state at step " + std::to_string(j + 1), j + 1);
    }
  }
  return x;
}

}  // namespace padmm
