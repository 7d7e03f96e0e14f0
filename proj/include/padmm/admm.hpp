#pragma once

#include "padmm/diagnostics.hpp"
#include "padmm/lagrangian.hpp"
#include "padmm/problem.hpp"
#include "padmm/subsolvers.hpp"

#include <functional>
#include <vector>

namespace padmm {

/// Parameters of the Gauss-Seidel proximal iteration: penalties rho_j on the
/// constraints, proximal weights eta_i on the primal blocks (xi_q on control
/// blocks for the controlled shape), the stopping rules and the inner solver
/// settings.
struct AdmmParams {
  PenaltyVector rho;
  Eigen::ArrayXd eta;
  Eigen::ArrayXd xi;  ///< controlled shape only

  int max_iterations = 1000;
  double primal_step_tol = 1e-10;
  double feasibility_tol = 1e-8;
  double kkt_tol = 1e-8;
  SubsolverOptions subsolver;
  bool record_kkt = true;  ///< skip the per-iteration stationarity pass when false

  static AdmmParams uniform(int n, double rho_value, double eta_value);

  void validate(int n, bool controlled = false) const;
};

/// Mutable iteration state. `x_previous` is the pre-sweep `x_current` of the
/// latest completed iteration.
struct AdmmState {
  Trajectory x_current;
  Trajectory x_previous;
  DualVariables lambda;
  ControlSequence u_current;   ///< controlled shape only
  ControlSequence u_previous;  ///< controlled shape only
  int iteration = 0;
  IterationRecord last_record;
};

enum class StopReason { MaxIterations, PrimalStepAndFeasibility, KktResidual };

const char* to_string(StopReason r);

struct SolveResult {
  AdmmState state;
  std::vector<IterationRecord> log;
  StopReason stop_reason = StopReason::MaxIterations;
};

using IterationSink = std::function<void(const IterationRecord&)>;

/// The block-i minimization of one Gauss-Seidel step: starting objective
/// f_i(x_i), plus the coupling term to the already-updated left neighbour,
/// plus the coupling term to the not-yet-updated right neighbour, plus the
/// proximal term (1/(2 eta_i)) ||x_i - x_i^k||^2, with constants dropped.
/// Reads the mixed iterate from `state.x_current` (blocks < i updated, blocks
/// >= i from iterate k) so it is valid mid-sweep; the warm start and proximal
/// centre are `state.x_current[i]`. When f_i has least-squares structure the
/// spec carries the stacked residual/Jacobian view.
SubproblemSpec block_subproblem_assemble(const DynamicsProblem& problem, const AdmmState& state,
                                         const AdmmParams& params, int i);

/// lambda_j <- lambda_j + rho_j r_j(x_current) with the shape-appropriate residual.
void dual_update(const DynamicsProblem& problem, AdmmState& state, const AdmmParams& params, int j);

/// One iteration of the forward sweep (blocks 0..n ascending, then all dual
/// updates). Explicit and semi-implicit shapes. Every accepted block satisfies
/// the descent contract against its warm start; a violation aborts with a
/// SolveError naming the block.
IterationRecord sweep_forward(const DynamicsProblem& problem, AdmmState& state, const AdmmParams& params);

/// One iteration of the reverse sweep (blocks n..0 descending) for the
/// implicit shape.
IterationRecord sweep_reverse(const DynamicsProblem& problem, AdmmState& state, const AdmmParams& params);

/// One composite iteration for the controlled shape: control blocks u_0..u_n
/// (projected, weights xi), then state blocks x_1..x_n ascending, then duals.
IterationRecord sweep_control(const ControlledProblem& problem, AdmmState& state, const AdmmParams& params);

/// Iterates the shape-appropriate sweep until max_iterations, or the primal
/// step and feasibility both fall below their tolerances, or the KKT residual
/// does (stationarity <= kkt_tol and feasibility <= feasibility_tol). Returns
/// the full per-iteration log.
SolveResult solve(const DynamicsProblem& problem, Trajectory x0, DualVariables lambda0, const AdmmParams& params,
                  const IterationSink& sink = {});

SolveResult solve(const ControlledProblem& problem, Trajectory x0, ControlSequence u0, DualVariables lambda0,
                  const AdmmParams& params, const IterationSink& sink = {});

}  // namespace padmm
