#include "padmm/lagrangian.hpp"

#include <cmath>

namespace padmm {

void validate_proximal_weights(const Eigen::ArrayXd& eta, const char* name) {
  for (int i = 0; i < eta.size(); ++i) {
    if (!(eta[i] > 0.0) || !std::isfinite(eta[i])) {
      throw ParameterError(std::string(name) + "_" + std::to_string(i) + " must be strictly positive");
    }
  }
}

namespace {

void check_rho(const DynamicsProblem& problem, const PenaltyVector& rho) {
  rho.validate();
  if (rho.size() != problem.transition_count()) {
    throw DimensionError("penalty vector has wrong length", rho.size());
  }
}

}  // namespace

double lagrangian_value(const DynamicsProblem& problem, const Trajectory& x, const DualVariables& lambda) {
  problem.check_duals(lambda);
  double total = evaluate_objective(problem, x);
  for (int j = 0; j < problem.transition_count(); ++j) {
    total += lambda[j].dot(constraint_residual(problem, x, j));
  }
  return total;
}

double augmented_lagrangian_value(const DynamicsProblem& problem, const Trajectory& x, const DualVariables& lambda,
                                  const PenaltyVector& rho) {
  problem.check_duals(lambda);
  check_rho(problem, rho);
  double total = evaluate_objective(problem, x);
  for (int j = 0; j < problem.transition_count(); ++j) {
    const Vector r = constraint_residual(problem, x, j);
    total += lambda[j].dot(r) + 0.5 * rho[j] * r.squaredNorm();
  }
  return total;
}

double augmented_lagrangian_value_completed_square(const DynamicsProblem& problem, const Trajectory& x,
                                                   const DualVariables& lambda, const PenaltyVector& rho) {
  problem.check_duals(lambda);
  check_rho(problem, rho);
  double total = evaluate_objective(problem, x);
  for (int j = 0; j < problem.transition_count(); ++j) {
    const Vector r = constraint_residual(problem, x, j);
    total += 0.5 * rho[j] * (r + lambda[j] / rho[j]).squaredNorm() - lambda[j].squaredNorm() / (2.0 * rho[j]);
  }
  return total;
}

namespace {

// Shared skeleton for the penalized (weight_j = lambda_j + rho_j r_j) and
// penalty-free (weight_j = lambda_j) block gradients.
Vector block_gradient_impl(const DynamicsProblem& problem, const Trajectory& x, const DualVariables& lambda,
                           const PenaltyVector* rho, int i) {
  const int n = problem.transition_count();
  if (i < 0 || i > n) throw DimensionError("block gradient: index out of range", i);

  const auto weight = [&](int j) -> Vector {
    if (rho == nullptr) return lambda[j];
    return lambda[j] + (*rho)[j] * constraint_residual(problem, x, j);
  };

  Vector g = problem.term(i).gradient(x[i]);
  switch (problem.shape()) {
    case ConstraintShape::ExplicitForward:
      if (i >= 1) g += weight(i - 1);
      if (i <= n - 1) g -= problem.step_map(i).jtprod(x[i], weight(i));
      break;
    case ConstraintShape::SemiImplicit:
      if (i >= 1) g += problem.step_matrix(i - 1).transpose() * weight(i - 1);
      if (i <= n - 1) g -= problem.step_map(i).jtprod(x[i], weight(i));
      break;
    case ConstraintShape::ImplicitBackward:
      if (i >= 1) g += problem.dynamics().jtprod(x[i], weight(i - 1));
      if (i <= n - 1) g -= weight(i);
      break;
    case ConstraintShape::Controlled:
      throw ParameterError("block gradient: controlled problems use the state/control variants");
  }
  return g;
}

}  // namespace

Vector aug_lagrangian_block_gradient(const DynamicsProblem& problem, const Trajectory& x, const DualVariables& lambda,
                                     const PenaltyVector& rho, int i) {
  problem.check_trajectory(x);
  problem.check_duals(lambda);
  check_rho(problem, rho);
  return block_gradient_impl(problem, x, lambda, &rho, i);
}

Vector lagrangian_block_gradient(const DynamicsProblem& problem, const Trajectory& x, const DualVariables& lambda,
                                 int i) {
  problem.check_trajectory(x);
  problem.check_duals(lambda);
  return block_gradient_impl(problem, x, lambda, nullptr, i);
}

KktResidual kkt_residual(const DynamicsProblem& problem, const Trajectory& x, const DualVariables& lambda) {
  problem.check_trajectory(x);
  problem.check_duals(lambda);
  KktResidual res;
  for (int i = 0; i <= problem.transition_count(); ++i) {
    const Vector g = block_gradient_impl(problem, x, lambda, nullptr, i);
    if (g.size() > 0) res.stationarity = std::max(res.stationarity, g.cwiseAbs().maxCoeff());
  }
  for (int j = 0; j < problem.transition_count(); ++j) {
    const Vector r = constraint_residual(problem, x, j);
    if (r.size() > 0) res.feasibility = std::max(res.feasibility, r.cwiseAbs().maxCoeff());
  }
  return res;
}

double lyapunov_value(const DynamicsProblem& problem, const Trajectory& x_now, const Trajectory& x_prev,
                      const DualVariables& lambda, const PenaltyVector& rho, const Eigen::ArrayXd& eta) {
  problem.check_trajectory(x_now);
  problem.check_trajectory(x_prev);
  validate_proximal_weights(eta);
  if (eta.size() != problem.block_count()) throw DimensionError("eta has wrong length", static_cast<int>(eta.size()));
  double e = augmented_lagrangian_value(problem, x_now, lambda, rho);
  for (int i = 0; i <= problem.transition_count(); ++i) {
    e += (x_now[i] - x_prev[i]).squaredNorm() / (4.0 * eta[i]);
  }
  return e;
}

double lagrangian_value(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u,
                        const DualVariables& lambda) {
  problem.check_duals(lambda);
  double total = evaluate_objective(problem, x, u);
  for (int j = 0; j < problem.transition_count(); ++j) {
    total += lambda[j].dot(constraint_residual(problem, x, u, j));
  }
  return total;
}

double augmented_lagrangian_value(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u,
                                  const DualVariables& lambda, const PenaltyVector& rho) {
  problem.check_duals(lambda);
  rho.validate();
  double total = evaluate_objective(problem, x, u);
  for (int j = 0; j < problem.transition_count(); ++j) {
    const Vector r = constraint_residual(problem, x, u, j);
    total += lambda[j].dot(r) + 0.5 * rho[j] * r.squaredNorm();
  }
  return total;
}

namespace {

Vector controlled_state_gradient_impl(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u,
                                      const DualVariables& lambda, const PenaltyVector* rho, int i) {
  const int n = problem.transition_count();
  if (i < 1 || i > n) throw DimensionError("state gradient: x_0 is fixed; index must be in [1, n]", i);
  const auto weight = [&](int j) -> Vector {
    if (rho == nullptr) return lambda[j];
    return lambda[j] + (*rho)[j] * constraint_residual(problem, x, u, j);
  };
  Vector g = problem.term(i).grad_state(x[i], u[i]);
  g += weight(i - 1);
  if (i <= n - 1) g -= problem.dynamics().jtprod_state(x[i], u[i], weight(i));
  return g;
}

Vector controlled_control_gradient_impl(const ControlledProblem& problem, const Trajectory& x,
                                        const ControlSequence& u, const DualVariables& lambda,
                                        const PenaltyVector* rho, int q) {
  const int n = problem.transition_count();
  if (q < 0 || q > n) throw DimensionError("control gradient: index out of range", q);
  Vector g = problem.term(q).grad_control(x[q], u[q]);
  if (q <= n - 1) {
    Vector w = lambda[q];
    if (rho != nullptr) w += (*rho)[q] * constraint_residual(problem, x, u, q);
    g -= problem.dynamics().jtprod_control(x[q], u[q], w);
  }
  return g;
}

}  // namespace

Vector aug_lagrangian_state_gradient(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u,
                                     const DualVariables& lambda, const PenaltyVector& rho, int i) {
  rho.validate();
  return controlled_state_gradient_impl(problem, x, u, lambda, &rho, i);
}

Vector aug_lagrangian_control_gradient(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u,
                                       const DualVariables& lambda, const PenaltyVector& rho, int q) {
  rho.validate();
  return controlled_control_gradient_impl(problem, x, u, lambda, &rho, q);
}

KktResidual kkt_residual(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u,
                         const DualVariables& lambda) {
  problem.check_trajectory(x);
  problem.check_controls(u);
  problem.check_duals(lambda);
  KktResidual res;
  for (int i = 1; i <= problem.transition_count(); ++i) {
    const Vector g = controlled_state_gradient_impl(problem, x, u, lambda, nullptr, i);
    if (g.size() > 0) res.stationarity = std::max(res.stationarity, g.cwiseAbs().maxCoeff());
  }
  for (int q = 0; q <= problem.transition_count(); ++q) {
    const Vector g = controlled_control_gradient_impl(problem, x, u, lambda, nullptr, q);
    if (g.size() > 0) res.stationarity = std::max(res.stationarity, g.cwiseAbs().maxCoeff());
  }
  for (int j = 0; j < problem.transition_count(); ++j) {
    const Vector r = constraint_residual(problem, x, u, j);
    if (r.size() > 0) res.feasibility = std::max(res.feasibility, r.cwiseAbs().maxCoeff());
  }
  return res;
}

double lyapunov_value(const ControlledProblem& problem, const Trajectory& x_now, const Trajectory& x_prev,
                      const ControlSequence& u_now, const ControlSequence& u_prev, const DualVariables& lambda,
                      const PenaltyVector& rho, const Eigen::ArrayXd& eta, const Eigen::ArrayXd& xi) {
  validate_proximal_weights(eta);
  validate_proximal_weights(xi, "xi");
  double e = augmented_lagrangian_value(problem, x_now, u_now, lambda, rho);
  for (int i = 1; i <= problem.transition_count(); ++i) {
    e += (x_now[i] - x_prev[i]).squaredNorm() / (4.0 * eta[i]);
  }
  for (int q = 0; q <= problem.transition_count(); ++q) {
    e += (u_now[q] - u_prev[q]).squaredNorm() / (4.0 * xi[q]);
  }
  return e;
}

}  // namespace padmm
