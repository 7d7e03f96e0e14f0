#include "padmm/admm.hpp"

#include <chrono>
#include <cmath>
#include <utility>

namespace padmm {

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxIterations: return "max-iterations";
    case StopReason::PrimalStepAndFeasibility: return "primal-step-and-feasibility";
    case StopReason::KktResidual: return "kkt-residual";
  }
  return "unknown";
}

AdmmParams AdmmParams::uniform(int n, double rho_value, double eta_value) {
  AdmmParams p;
  p.rho = PenaltyVector::constant(n, rho_value);
  p.eta = Eigen::ArrayXd::Constant(n + 1, eta_value);
  return p;
}

void AdmmParams::validate(int n, bool controlled) const {
  rho.validate();
  if (rho.size() != n) throw ParameterError("AdmmParams: rho must have n entries");
  validate_proximal_weights(eta);
  if (eta.size() != n + 1) throw ParameterError("AdmmParams: eta must have n+1 entries");
  if (controlled) {
    validate_proximal_weights(xi, "xi");
    if (xi.size() != n + 1) throw ParameterError("AdmmParams: xi must have n+1 entries");
  }
  if (max_iterations < 0) throw ParameterError("AdmmParams: max_iterations must be >= 0");
  if (!(primal_step_tol > 0.0) || !(feasibility_tol > 0.0) || !(kkt_tol > 0.0)) {
    throw ParameterError("AdmmParams: stopping tolerances must be positive");
  }
  if (!(subsolver.inner_tol_rel > 0.0)) throw ParameterError("AdmmParams: inner tolerance must be positive");
}

namespace {

// Stacks dense least-squares rows; used to build the spec's residual view.
struct ResidualStack {
  std::vector<std::function<Vector(const Vector&)>> residuals;
  std::vector<std::function<Matrix(const Vector&)>> jacobians;
};

// One quadratic coupling or proximal row: sqrt(weight) * (scale_z * M z + offset),
// with M either the identity or a captured matrix.
void push_affine_row(ResidualStack& stack, double weight, double scale_z, Vector offset) {
  const double w = std::sqrt(weight);
  stack.residuals.push_back(
      [w, scale_z, offset](const Vector& z) { return (w * (scale_z * z + offset)).eval(); });
  stack.jacobians.push_back([w, scale_z](const Vector& z) {
    return (w * scale_z * Matrix::Identity(z.size(), z.size())).eval();
  });
}

void push_matrix_row(ResidualStack& stack, double weight, Matrix m, Vector offset) {
  const double w = std::sqrt(weight);
  stack.residuals.push_back([w, m, offset](const Vector& z) { return (w * (m * z + offset)).eval(); });
  stack.jacobians.push_back([w, m](const Vector&) { return (w * m).eval(); });
}

// Row sqrt(weight) * (sign * phi(z) + offset) through the dynamics map.
void push_map_row(ResidualStack& stack, double weight, double sign, DynamicsMap map, Vector offset) {
  const double w = std::sqrt(weight);
  stack.residuals.push_back(
      [w, sign, map, offset](const Vector& z) { return (w * (sign * map.value(z) + offset)).eval(); });
  stack.jacobians.push_back(
      [w, sign, map](const Vector& z) { return (w * sign * map.dense_jacobian(z)).eval(); });
}

}  // namespace

SubproblemSpec block_subproblem_assemble(const DynamicsProblem& problem, const AdmmState& state,
                                         const AdmmParams& params, int i) {
  const int n = problem.transition_count();
  const int d = problem.dimension();
  if (i < 0 || i > n) throw DimensionError("block_subproblem_assemble: index out of range", i);
  problem.check_trajectory(state.x_current);
  problem.check_duals(state.lambda);

  const ObjectiveTerm f = problem.term(i);
  const Vector prox_center = state.x_current[i];  // x_i^k, not yet overwritten
  const double prox_weight = 1.0 / params.eta[i];
  const ConstraintShape shape = problem.shape();

  // Quadratic value/gradient pieces, built per shape. Each piece captures only
  // constants and map callbacks, so the spec stays valid on its own.
  struct QuadPiece {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
  };
  std::vector<QuadPiece> pieces;
  ResidualStack stack;
  bool sparse_ok = true;
  std::vector<std::function<Eigen::SparseMatrix<double>(const Vector&)>> sparse_jacobians;

  if (f.has_least_squares()) {
    stack.residuals.push_back(f.residual);
    stack.jacobians.push_back(f.residual_jacobian);
    auto fj = f.residual_jacobian;
    sparse_jacobians.push_back([fj](const Vector& z) { return fj(z).sparseView().eval(); });
  }

  const auto add_affine = [&](double weight, double scale_z, const Vector& offset) {
    pieces.push_back({[weight, scale_z, offset](const Vector& z) {
                        return 0.5 * weight * (scale_z * z + offset).squaredNorm();
                      },
                      [weight, scale_z, offset](const Vector& z) {
                        return (weight * scale_z * (scale_z * z + offset)).eval();
                      }});
    push_affine_row(stack, weight, scale_z, offset);
    const double w = std::sqrt(weight);
    sparse_jacobians.push_back([w, scale_z, d](const Vector&) {
      Eigen::SparseMatrix<double> m(d, d);
      m.setIdentity();
      return (w * scale_z * m).eval();
    });
  };

  const auto add_matrix = [&](double weight, const Matrix& m, const Vector& offset) {
    pieces.push_back({[weight, m, offset](const Vector& z) { return 0.5 * weight * (m * z + offset).squaredNorm(); },
                      [weight, m, offset](const Vector& z) {
                        return (weight * m.transpose() * (m * z + offset)).eval();
                      }});
    push_matrix_row(stack, weight, m, offset);
    const double w = std::sqrt(weight);
    sparse_jacobians.push_back([w, m](const Vector&) { return (w * m).sparseView().eval(); });
  };

  const auto add_map = [&](double weight, double sign, const DynamicsMap& map, const Vector& offset) {
    pieces.push_back({[weight, sign, map, offset](const Vector& z) {
                        return 0.5 * weight * (sign * map.value(z) + offset).squaredNorm();
                      },
                      [weight, sign, map, offset](const Vector& z) {
                        return (weight * sign * map.jtprod(z, sign * map.value(z) + offset)).eval();
                      }});
    push_map_row(stack, weight, sign, map, offset);
    if (map.sparse_jacobian) {
      const double w = std::sqrt(weight);
      auto sj = map.sparse_jacobian;
      sparse_jacobians.push_back([w, sign, sj](const Vector& z) { return (w * sign * sj(z)).eval(); });
    } else {
      sparse_ok = false;
    }
  };

  switch (shape) {
    case ConstraintShape::ExplicitForward: {
      if (i >= 1) {
        const double rho = params.rho[i - 1];
        const Vector offset = -problem.step_map(i - 1).value(state.x_current[i - 1]) + state.lambda[i - 1] / rho;
        add_affine(rho, 1.0, offset);
      }
      if (i <= n - 1) {
        const double rho = params.rho[i];
        const Vector offset = state.x_current[i + 1] + state.lambda[i] / rho;
        add_map(rho, -1.0, problem.step_map(i), offset);
      }
      break;
    }
    case ConstraintShape::SemiImplicit: {
      if (i >= 1) {
        const double rho = params.rho[i - 1];
        const Vector offset = -problem.step_map(i - 1).value(state.x_current[i - 1]) + state.lambda[i - 1] / rho;
        add_matrix(rho, problem.step_matrix(i - 1), offset);
      }
      if (i <= n - 1) {
        const double rho = params.rho[i];
        const Vector offset = problem.step_matrix(i) * state.x_current[i + 1] + state.lambda[i] / rho;
        add_map(rho, -1.0, problem.step_map(i), offset);
      }
      break;
    }
    case ConstraintShape::ImplicitBackward: {
      if (i <= n - 1) {
        const double rho = params.rho[i];
        const Vector offset = problem.dynamics().value(state.x_current[i + 1]) + state.lambda[i] / rho;
        add_affine(rho, -1.0, offset);
      }
      if (i >= 1) {
        const double rho = params.rho[i - 1];
        const Vector offset = -state.x_current[i - 1] + state.lambda[i - 1] / rho;
        add_map(rho, 1.0, problem.dynamics(), offset);
      }
      break;
    }
    case ConstraintShape::Controlled:
      throw ParameterError("block_subproblem_assemble: controlled problems assemble inside sweep_control");
  }

  add_affine(prox_weight, 1.0, -prox_center);

  SubproblemSpec spec;
  spec.dimension = d;
  spec.warm_start = prox_center;
  spec.iteration_cap = params.subsolver.iteration_cap;

  auto f_value = f.value;
  auto shared_pieces = std::make_shared<const std::vector<QuadPiece>>(std::move(pieces));
  spec.value = [f_value, shared_pieces](const Vector& z) {
    double v = f_value(z);
    for (const QuadPiece& p : *shared_pieces) v += p.value(z);
    return v;
  };
  auto f_gradient = f.gradient;
  spec.gradient = [f_gradient, shared_pieces](const Vector& z) {
    Vector g = f_gradient(z);
    for (const QuadPiece& p : *shared_pieces) g += p.gradient(z);
    return g;
  };

  if (f.has_least_squares()) {
    auto rows = std::make_shared<const ResidualStack>(std::move(stack));
    spec.residual = [rows, d](const Vector& z) {
      Eigen::Index total = 0;
      std::vector<Vector> parts;
      parts.reserve(rows->residuals.size());
      for (const auto& r : rows->residuals) {
        parts.push_back(r(z));
        total += parts.back().size();
      }
      Vector out(total);
      Eigen::Index at = 0;
      for (const Vector& p : parts) {
        out.segment(at, p.size()) = p;
        at += p.size();
      }
      (void)d;
      return out;
    };
    spec.residual_jacobian = [rows, d](const Vector& z) {
      std::vector<Matrix> parts;
      parts.reserve(rows->jacobians.size());
      Eigen::Index total = 0;
      for (const auto& j : rows->jacobians) {
        parts.push_back(j(z));
        total += parts.back().rows();
      }
      Matrix out(total, d);
      Eigen::Index at = 0;
      for (const Matrix& p : parts) {
        out.middleRows(at, p.rows()) = p;
        at += p.rows();
      }
      return out;
    };
    if (sparse_ok) {
      auto sparse_rows =
          std::make_shared<const std::vector<std::function<Eigen::SparseMatrix<double>(const Vector&)>>>(
              std::move(sparse_jacobians));
      spec.sparse_residual_jacobian = [sparse_rows, d](const Vector& z) {
        std::vector<Eigen::SparseMatrix<double>> parts;
        parts.reserve(sparse_rows->size());
        Eigen::Index total = 0;
        Eigen::Index nnz = 0;
        for (const auto& j : *sparse_rows) {
          parts.push_back(j(z));
          total += parts.back().rows();
          nnz += parts.back().nonZeros();
        }
        Eigen::SparseMatrix<double> out(total, d);
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(static_cast<std::size_t>(nnz));
        Eigen::Index at = 0;
        for (const auto& p : parts) {
          for (int k = 0; k < p.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(p, k); it; ++it) {
              triplets.emplace_back(static_cast<int>(at + it.row()), static_cast<int>(it.col()), it.value());
            }
          }
          at += p.rows();
        }
        out.setFromTriplets(triplets.begin(), triplets.end());
        return out;
      };
    }
  }

  // Absolute inner tolerance scaled by the warm-start gradient.
  spec.inner_tolerance = params.subsolver.inner_tol_rel * (1.0 + spec.gradient(prox_center).norm());
  return spec;
}

void dual_update(const DynamicsProblem& problem, AdmmState& state, const AdmmParams& params, int j) {
  if (j < 0 || j >= problem.transition_count()) throw DimensionError("dual_update: index out of range", j);
  state.lambda[j] += params.rho[j] * constraint_residual(problem, state.x_current, j);
}

namespace {

// Solves block i at the current mixed iterate and enforces the descent
// contract in the spec's own value metric.
void solve_block(const DynamicsProblem& problem, AdmmState& state, const AdmmParams& params, int i) {
  const SubproblemSpec spec = block_subproblem_assemble(problem, state, params, i);
  const SubsolveReport report = solve_subproblem(spec, params.subsolver);
  const double warm_value = spec.value(spec.warm_start);
  const double new_value = spec.value(report.solution);
  if (!(new_value <= warm_value)) {
    throw SolveError("sweep: block " + std::to_string(i) + " violated the descent contract (" +
                     to_string(report.status) + ")");
  }
  if (!report.solution.allFinite()) {
    throw SolveError("sweep: block " + std::to_string(i) + " produced a non-finite update");
  }
  state.x_current[i] = report.solution;
}

IterationRecord make_record(const DynamicsProblem& problem, const AdmmState& state, const AdmmParams& params,
                            const DualVariables& lambda_before, double wall_ms) {
  IterationRecord rec;
  rec.iteration = state.iteration;
  rec.objective = evaluate_objective(problem, state.x_current);
  rec.constraint_inf = 0.0;
  rec.constraint_sq = 0.0;
  for (int j = 0; j < problem.transition_count(); ++j) {
    const Vector r = constraint_residual(problem, state.x_current, j);
    rec.constraint_inf = std::max(rec.constraint_inf, r.cwiseAbs().maxCoeff());
    rec.constraint_sq += r.squaredNorm();
    rec.auglag += state.lambda[j].dot(r) + 0.5 * params.rho[j] * r.squaredNorm();
  }
  rec.auglag += rec.objective;
  rec.lyapunov = rec.auglag;
  for (int i = 0; i <= problem.transition_count(); ++i) {
    rec.lyapunov += (state.x_current[i] - state.x_previous[i]).squaredNorm() / (4.0 * params.eta[i]);
  }
  rec.primal_step_inf = state.x_current.inf_norm_diff(state.x_previous);
  rec.primal_step_blocks_sq = state.x_current.blockwise_sq_diff(state.x_previous);
  rec.dual_step_inf = state.lambda.inf_norm_diff(lambda_before);
  rec.kkt_stationarity = params.record_kkt ? kkt_residual(problem, state.x_current, state.lambda).stationarity : 0.0;
  rec.wall_ms = wall_ms;
  return rec;
}

IterationRecord sweep_impl(const DynamicsProblem& problem, AdmmState& state, const AdmmParams& params, bool reverse) {
  params.validate(problem.transition_count());
  problem.check_trajectory(state.x_current);
  problem.check_duals(state.lambda);

  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory x_k = state.x_current;
  const DualVariables lambda_k = state.lambda;
  const int n = problem.transition_count();

  if (reverse) {
    for (int i = n; i >= 0; --i) solve_block(problem, state, params, i);
  } else {
    for (int i = 0; i <= n; ++i) solve_block(problem, state, params, i);
  }
  for (int j = 0; j < n; ++j) dual_update(problem, state, params, j);
  state.x_previous = x_k;
  state.iteration += 1;

  const double wall_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(std::chrono::steady_clock::now() - t0)
          .count();
  state.last_record = make_record(problem, state, params, lambda_k, wall_ms);
  return state.last_record;
}

}  // namespace

IterationRecord sweep_forward(const DynamicsProblem& problem, AdmmState& state, const AdmmParams& params) {
  if (problem.shape() != ConstraintShape::ExplicitForward && problem.shape() != ConstraintShape::SemiImplicit) {
    throw ParameterError("sweep_forward: requires the explicit or semi-implicit shape");
  }
  return sweep_impl(problem, state, params, /*reverse=*/false);
}

IterationRecord sweep_reverse(const DynamicsProblem& problem, AdmmState& state, const AdmmParams& params) {
  if (problem.shape() != ConstraintShape::ImplicitBackward) {
    throw ParameterError("sweep_reverse: requires the implicit shape");
  }
  return sweep_impl(problem, state, params, /*reverse=*/true);
}

namespace {

SubproblemSpec control_subproblem_assemble(const ControlledProblem& problem, const AdmmState& state,
                                           const AdmmParams& params, int q) {
  const int n = problem.transition_count();
  const ControlledObjectiveTerm f = problem.term(q);
  const Vector x_q = state.x_current[q];
  const Vector prox_center = state.u_current[q];
  const double prox_weight = 1.0 / params.xi[q];
  const ControlledDynamicsMap map = problem.dynamics();

  const bool coupled = q <= n - 1;
  const double rho = coupled ? params.rho[q] : 0.0;
  const Vector offset = coupled ? Vector(state.x_current[q + 1] + state.lambda[q] / rho) : Vector();

  SubproblemSpec spec;
  spec.dimension = problem.control_dimension();
  spec.warm_start = prox_center;
  spec.iteration_cap = params.subsolver.iteration_cap;
  spec.value = [f, map, x_q, coupled, rho, offset, prox_weight, prox_center](const Vector& w) {
    double v = f.value(x_q, w) + 0.5 * prox_weight * (w - prox_center).squaredNorm();
    if (coupled) v += 0.5 * rho * (offset - map.value(x_q, w)).squaredNorm();
    return v;
  };
  spec.gradient = [f, map, x_q, coupled, rho, offset, prox_weight, prox_center](const Vector& w) {
    Vector g = f.grad_control(x_q, w) + prox_weight * (w - prox_center);
    if (coupled) g -= rho * map.jtprod_control(x_q, w, offset - map.value(x_q, w));
    return g;
  };
  spec.inner_tolerance = params.subsolver.inner_tol_rel * (1.0 + spec.gradient(prox_center).norm());
  return spec;
}

SubproblemSpec state_subproblem_assemble(const ControlledProblem& problem, const AdmmState& state,
                                         const AdmmParams& params, int i) {
  const int n = problem.transition_count();
  const ControlledObjectiveTerm f = problem.term(i);
  const Vector u_i = state.u_current[i];
  const Vector prox_center = state.x_current[i];
  const double prox_weight = 1.0 / params.eta[i];
  const ControlledDynamicsMap map = problem.dynamics();

  const double rho_left = params.rho[i - 1];
  const Vector offset_left =
      -map.value(state.x_current[i - 1], state.u_current[i - 1]) + state.lambda[i - 1] / rho_left;

  const bool coupled_right = i <= n - 1;
  const double rho_right = coupled_right ? params.rho[i] : 0.0;
  const Vector offset_right = coupled_right ? Vector(state.x_current[i + 1] + state.lambda[i] / rho_right) : Vector();

  SubproblemSpec spec;
  spec.dimension = problem.state_dimension();
  spec.warm_start = prox_center;
  spec.iteration_cap = params.subsolver.iteration_cap;
  spec.value = [f, map, u_i, rho_left, offset_left, coupled_right, rho_right, offset_right, prox_weight,
                prox_center](const Vector& z) {
    double v = f.value(z, u_i) + 0.5 * rho_left * (z + offset_left).squaredNorm() +
               0.5 * prox_weight * (z - prox_center).squaredNorm();
    if (coupled_right) v += 0.5 * rho_right * (offset_right - map.value(z, u_i)).squaredNorm();
    return v;
  };
  spec.gradient = [f, map, u_i, rho_left, offset_left, coupled_right, rho_right, offset_right, prox_weight,
                   prox_center](const Vector& z) {
    Vector g = f.grad_state(z, u_i) + rho_left * (z + offset_left) + prox_weight * (z - prox_center);
    if (coupled_right) g -= rho_right * map.jtprod_state(z, u_i, offset_right - map.value(z, u_i));
    return g;
  };
  spec.inner_tolerance = params.subsolver.inner_tol_rel * (1.0 + spec.gradient(prox_center).norm());
  return spec;
}

IterationRecord make_controlled_record(const ControlledProblem& problem, const AdmmState& state,
                                       const AdmmParams& params, const DualVariables& lambda_before, double wall_ms) {
  IterationRecord rec;
  rec.iteration = state.iteration;
  rec.objective = evaluate_objective(problem, state.x_current, state.u_current);
  for (int j = 0; j < problem.transition_count(); ++j) {
    const Vector r = constraint_residual(problem, state.x_current, state.u_current, j);
    rec.constraint_inf = std::max(rec.constraint_inf, r.cwiseAbs().maxCoeff());
    rec.constraint_sq += r.squaredNorm();
    rec.auglag += state.lambda[j].dot(r) + 0.5 * params.rho[j] * r.squaredNorm();
  }
  rec.auglag += rec.objective;
  rec.lyapunov = rec.auglag;
  for (int i = 1; i <= problem.transition_count(); ++i) {
    rec.lyapunov += (state.x_current[i] - state.x_previous[i]).squaredNorm() / (4.0 * params.eta[i]);
  }
  for (int q = 0; q <= problem.transition_count(); ++q) {
    rec.lyapunov += (state.u_current[q] - state.u_previous[q]).squaredNorm() / (4.0 * params.xi[q]);
  }
  rec.primal_step_inf =
      std::max(state.x_current.inf_norm_diff(state.x_previous), state.u_current.inf_norm_diff(state.u_previous));
  rec.primal_step_blocks_sq = state.x_current.blockwise_sq_diff(state.x_previous) +
                              state.u_current.blockwise_sq_diff(state.u_previous);
  rec.dual_step_inf = state.lambda.inf_norm_diff(lambda_before);
  rec.kkt_stationarity =
      params.record_kkt ? kkt_residual(problem, state.x_current, state.u_current, state.lambda).stationarity : 0.0;
  rec.wall_ms = wall_ms;
  return rec;
}

}  // namespace

IterationRecord sweep_control(const ControlledProblem& problem, AdmmState& state, const AdmmParams& params) {
  params.validate(problem.transition_count(), /*controlled=*/true);
  problem.check_trajectory(state.x_current);
  problem.check_controls(state.u_current);
  problem.check_duals(state.lambda);
  if (!problem.has_projection()) {
    throw ConfigError("sweep_control: admissible-control projection callback missing");
  }

  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory x_k = state.x_current;
  const ControlSequence u_k = state.u_current;
  const DualVariables lambda_k = state.lambda;
  const int n = problem.transition_count();
  const auto project = [&problem](const Vector& w) { return problem.project_control(w); };

  for (int q = 0; q <= n; ++q) {
    const SubproblemSpec spec = control_subproblem_assemble(problem, state, params, q);
    const SubsolveReport report = projected_descent(spec, project);
    if (!(spec.value(report.solution) <= spec.value(spec.warm_start)) || !report.solution.allFinite()) {
      throw SolveError("sweep_control: control block " + std::to_string(q) + " violated the descent contract");
    }
    state.u_current[q] = report.solution;
  }
  for (int i = 1; i <= n; ++i) {
    const SubproblemSpec spec = state_subproblem_assemble(problem, state, params, i);
    const SubsolveReport report = solve_subproblem(spec, params.subsolver);
    if (!(spec.value(report.solution) <= spec.value(spec.warm_start)) || !report.solution.allFinite()) {
      throw SolveError("sweep_control: state block " + std::to_string(i) + " violated the descent contract");
    }
    state.x_current[i] = report.solution;
  }
  for (int j = 0; j < n; ++j) {
    state.lambda[j] += params.rho[j] * constraint_residual(problem, state.x_current, state.u_current, j);
  }
  state.x_previous = x_k;
  state.u_previous = u_k;
  state.iteration += 1;

  const double wall_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(std::chrono::steady_clock::now() - t0)
          .count();
  state.last_record = make_controlled_record(problem, state, params, lambda_k, wall_ms);
  return state.last_record;
}

namespace {

template <typename SweepFn>
SolveResult solve_loop(AdmmState state, const AdmmParams& params, const IterationSink& sink, SweepFn&& sweep) {
  SolveResult result;
  result.stop_reason = StopReason::MaxIterations;
  result.log.reserve(static_cast<std::size_t>(std::min(params.max_iterations, 1 << 20)));
  for (int k = 0; k < params.max_iterations; ++k) {
    const IterationRecord rec = sweep(state);
    result.log.push_back(rec);
    if (sink) sink(rec);
    if (params.record_kkt && rec.kkt_stationarity <= params.kkt_tol && rec.constraint_inf <= params.feasibility_tol) {
      result.stop_reason = StopReason::KktResidual;
      break;
    }
    if (rec.primal_step_inf <= params.primal_step_tol && rec.constraint_inf <= params.feasibility_tol) {
      result.stop_reason = StopReason::PrimalStepAndFeasibility;
      break;
    }
  }
  result.state = std::move(state);
  return result;
}

}  // namespace

SolveResult solve(const DynamicsProblem& problem, Trajectory x0, DualVariables lambda0, const AdmmParams& params,
                  const IterationSink& sink) {
  params.validate(problem.transition_count());
  problem.check_trajectory(x0);
  problem.check_duals(lambda0);
  AdmmState state;
  state.x_current = std::move(x0);
  state.x_previous = state.x_current;
  state.lambda = std::move(lambda0);

  const bool reverse = problem.shape() == ConstraintShape::ImplicitBackward;
  return solve_loop(std::move(state), params, sink, [&problem, &params, reverse](AdmmState& s) {
    return reverse ? sweep_reverse(problem, s, params) : sweep_forward(problem, s, params);
  });
}

SolveResult solve(const ControlledProblem& problem, Trajectory x0, ControlSequence u0, DualVariables lambda0,
                  const AdmmParams& params, const IterationSink& sink) {
  params.validate(problem.transition_count(), /*controlled=*/true);
  problem.check_trajectory(x0);
  problem.check_controls(u0);
  problem.check_duals(lambda0);
  AdmmState state;
  state.x_current = std::move(x0);
  state.x_current[0] = problem.initial_state();
  state.x_previous = state.x_current;
  state.u_current = std::move(u0);
  state.u_previous = state.u_current;
  state.lambda = std::move(lambda0);
  return solve_loop(std::move(state), params, sink,
                    [&problem, &params](AdmmState& s) { return sweep_control(problem, s, params); });
}

}  // namespace padmm
