#pragma once

#include "padmm/problem.hpp"

#include <Eigen/Core>

namespace padmm {

/// Penalty parameters rho_0, ..., rho_{n-1}, all strictly positive.
struct PenaltyVector {
  Eigen::ArrayXd values;

  PenaltyVector() = default;
  explicit PenaltyVector(Eigen::ArrayXd v) : values(std::move(v)) { validate(); }
  static PenaltyVector constant(int n, double value) {
    return PenaltyVector(Eigen::ArrayXd::Constant(n, value));
  }

  int size() const noexcept { return static_cast<int>(values.size()); }
  double operator[](int j) const { return values[j]; }

  void validate() const {
    for (int j = 0; j < values.size(); ++j) {
      if (!(values[j] > 0.0) || !std::isfinite(values[j])) {
        throw ParameterError("PenaltyVector: rho_" + std::to_string(j) + " must be strictly positive");
      }
    }
  }
};

/// Throws unless every eta_i is strictly positive and finite.
void validate_proximal_weights(const Eigen::ArrayXd& eta, const char* name = "eta");

/// The two components of the first-order optimality measure: the inf-norm of
/// the (penalty-free) Lagrangian gradient and the worst constraint violation.
struct KktResidual {
  double stationarity = 0.0;
  double feasibility = 0.0;
};

/// L(x, lambda) = sum f_i(x_i) + sum_j <lambda_j, r_j(x)>.
double lagrangian_value(const DynamicsProblem& problem, const Trajectory& x, const DualVariables& lambda);

/// L_rho(x, lambda) = L(x, lambda) + sum_j (rho_j/2) ||r_j(x)||^2.
double augmented_lagrangian_value(const DynamicsProblem& problem, const Trajectory& x, const DualVariables& lambda,
                                  const PenaltyVector& rho);

/// The completed-square form
///   sum f_i + sum_j ( (rho_j/2) ||r_j + lambda_j/rho_j||^2 - ||lambda_j||^2/(2 rho_j) ),
/// algebraically identical to augmented_lagrangian_value; kept as an
/// independent evaluation route and used by subproblem assembly.
double augmented_lagrangian_value_completed_square(const DynamicsProblem& problem, const Trajectory& x,
                                                   const DualVariables& lambda, const PenaltyVector& rho);

/// grad_{x_i} L_rho(x, lambda); boundary blocks omit the absent coupling term.
Vector aug_lagrangian_block_gradient(const DynamicsProblem& problem, const Trajectory& x, const DualVariables& lambda,
                                     const PenaltyVector& rho, int i);

/// grad_{x_i} L(x, lambda), the penalty-free gradient used for KKT reporting.
Vector lagrangian_block_gradient(const DynamicsProblem& problem, const Trajectory& x, const DualVariables& lambda,
                                 int i);

KktResidual kkt_residual(const DynamicsProblem& problem, const Trajectory& x, const DualVariables& lambda);

/// E = L_rho(x_now, lambda) + sum_i (1/(4 eta_i)) ||x_now,i - x_prev,i||^2.
double lyapunov_value(const DynamicsProblem& problem, const Trajectory& x_now, const Trajectory& x_prev,
                      const DualVariables& lambda, const PenaltyVector& rho, const Eigen::ArrayXd& eta);

// Controlled-shape variants. Trajectories carry the fixed x_0 in block 0.

double lagrangian_value(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u,
                        const DualVariables& lambda);

double augmented_lagrangian_value(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u,
                                  const DualVariables& lambda, const PenaltyVector& rho);

Vector aug_lagrangian_state_gradient(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u,
                                     const DualVariables& lambda, const PenaltyVector& rho, int i);

Vector aug_lagrangian_control_gradient(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u,
                                       const DualVariables& lambda, const PenaltyVector& rho, int q);

/// Stationarity over the free blocks x_1..x_n and u_0..u_n plus feasibility.
KktResidual kkt_residual(const ControlledProblem& problem, const Trajectory& x, const ControlSequence& u,
                         const DualVariables& lambda);

double lyapunov_value(const ControlledProblem& problem, const Trajectory& x_now, const Trajectory& x_prev,
                      const ControlSequence& u_now, const ControlSequence& u_prev, const DualVariables& lambda,
                      const PenaltyVector& rho, const Eigen::ArrayXd& eta, const Eigen::ArrayXd& xi);

}  // namespace padmm
