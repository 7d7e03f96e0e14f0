#pragma once

// Shared instance builders and independent oracles used across the test
// suites. Everything here stays independent of the solver paths it checks:
// the linear-quadratic oracle reduces to x_0 and solves normal equations
// directly, and the random smooth instances carry hand-derived gradients.

#include "padmm/lagrangian.hpp"
#include "padmm/problem.hpp"
#include "padmm/random.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace padmm::testing {

/// Quadratic term 0.5 (x - t)^T Q (x - t) with SPD Q and its residual view
/// r = L^T (x - t), Q = L L^T.
inline ObjectiveTerm quadratic_term(Matrix q, Vector target) {
  ObjectiveTerm term;
  const Eigen::LLT<Matrix> llt(q);
  const Matrix lt = Matrix(llt.matrixL()).transpose();
  term.value = [q, target](const Vector& x) { return 0.5 * (x - target).dot(q * (x - target)); };
  term.gradient = [q, target](const Vector& x) { return (q * (x - target)).eval(); };
  term.residual = [lt, target](const Vector& x) { return (lt * (x - target)).eval(); };
  term.residual_jacobian = [lt](const Vector&) { return lt; };
  return term;
}

/// Smooth nonlinear map phi(x) = c + W x + a .* sin(x) with analytic
/// transpose-products and Jacobian.
inline DynamicsMap smooth_map(Matrix w, Vector a, Vector c) {
  DynamicsMap map;
  map.value = [w, a, c](const Vector& x) { return (c + w * x + (a.array() * x.array().sin()).matrix()).eval(); };
  map.jtprod = [w, a](const Vector& x, const Vector& v) {
    return (w.transpose() * v + (a.array() * x.array().cos() * v.array()).matrix()).eval();
  };
  map.jacobian = [w, a](const Vector& x) {
    Matrix j = w;
    j.diagonal() += (a.array() * x.array().cos()).matrix();
    return j;
  };
  return map;
}

struct RandomInstance {
  DynamicsProblem problem;
  Trajectory x;
  DualVariables lambda;
  PenaltyVector rho;
  Eigen::ArrayXd eta;
};

/// Random smooth explicit-shape instance with conforming containers filled
/// from the rng. `scale` bounds the nonlinearity of the dynamics.
inline RandomInstance random_explicit_instance(Rng& rng, int n, int d, double scale = 0.3) {
  std::vector<ObjectiveTerm> terms;
  terms.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    Matrix m(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) m(r, c) = rng.uniform(-1.0, 1.0);
    }
    Matrix q = m.transpose() * m + 0.2 * Matrix::Identity(d, d);
    terms.push_back(quadratic_term(std::move(q), rng.uniform_vector(d, -1.0, 1.0)));
  }
  Matrix w(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) w(r, c) = rng.uniform(-0.5, 0.5);
  }
  DynamicsMap map = smooth_map(std::move(w), rng.uniform_vector(d, -scale, scale), rng.uniform_vector(d, -1.0, 1.0));

  RandomInstance inst{DynamicsProblem::explicit_forward(n, d, std::move(terms), std::move(map)),
                      Trajectory(n + 1, d), DualVariables(n, d), PenaltyVector{}, Eigen::ArrayXd(n + 1)};
  for (int i = 0; i <= n; ++i) inst.x[i] = rng.uniform_vector(d, -2.0, 2.0);
  for (int j = 0; j < n; ++j) inst.lambda[j] = rng.uniform_vector(d, -1.0, 1.0);
  Eigen::ArrayXd rho(n);
  for (int j = 0; j < n; ++j) rho[j] = rng.uniform(0.2, 3.0);
  inst.rho = PenaltyVector(rho);
  for (int i = 0; i <= n; ++i) inst.eta[i] = rng.uniform(0.5, 20.0);
  return inst;
}

/// Closed-form KKT pair of the linear-quadratic instance
///   min sum_i 0.5 ||x_i - t_i||^2  s.t.  x_{j+1} = A x_j,
/// obtained by reducing to x_0 (normal equations) and back-substituting the
/// multipliers through the stationarity chain.
struct LqOracle {
  DynamicsProblem problem;
  Trajectory x_star;
  DualVariables lambda_star;
};

inline LqOracle lq_oracle(const Matrix& a, const std::vector<Vector>& targets) {
  const int n = static_cast<int>(targets.size()) - 1;
  const int d = static_cast<int>(a.rows());

  std::vector<ObjectiveTerm> terms;
  terms.reserve(targets.size());
  for (const Vector& t : targets) terms.push_back(ObjectiveTerm::squared_distance(t));
  DynamicsProblem problem = DynamicsProblem::explicit_forward(n, d, std::move(terms), DynamicsMap::linear(a));

  // Reduced problem in x_0: min 0.5 sum ||A^i x_0 - t_i||^2.
  Matrix hessian = Matrix::Zero(d, d);
  Vector rhs = Vector::Zero(d);
  Matrix power = Matrix::Identity(d, d);
  for (int i = 0; i <= n; ++i) {
    hessian += power.transpose() * power;
    rhs += power.transpose() * targets[static_cast<std::size_t>(i)];
    power = a * power;
  }
  const Vector x0 = hessian.ldlt().solve(rhs);

  LqOracle oracle{std::move(problem), Trajectory(n + 1, d), DualVariables(n, d)};
  oracle.x_star[0] = x0;
  for (int j = 0; j < n; ++j) oracle.x_star[j + 1] = a * oracle.x_star[j];
  // Stationarity chain: block n gives lambda_{n-1}; blocks n-1..1 recurse.
  oracle.lambda_star[n - 1] = -(oracle.x_star[n] - targets[static_cast<std::size_t>(n)]);
  for (int i = n - 1; i >= 1; --i) {
    oracle.lambda_star[i - 1] =
        a.transpose() * oracle.lambda_star[i] - (oracle.x_star[i] - targets[static_cast<std::size_t>(i)]);
  }
  return oracle;
}

/// Closed-form KKT solution of the linear-quadratic control instance
///   min sum_i 0.5 ||x_i - t_i||^2 + 0.5 ||u_i||^2
///   s.t. x_{j+1} = A x_j + B u_j,  x_0 fixed,
/// assembled as one dense KKT system over (x_1..x_n, u_0..u_n, lambda).
struct LqControlOracle {
  ControlledProblem problem;
  Trajectory x_star;       // includes the fixed x_0 in block 0
  ControlSequence u_star;  // u_0..u_n
  DualVariables lambda_star;
};

inline LqControlOracle lq_control_oracle(const Matrix& a, const Matrix& b, const Vector& x0,
                                         const std::vector<Vector>& targets) {
  const int n = static_cast<int>(targets.size()) - 1;
  const int dx = static_cast<int>(a.rows());
  const int du = static_cast<int>(b.cols());

  std::vector<ControlledObjectiveTerm> terms;
  terms.reserve(targets.size());
  for (const Vector& t : targets) {
    ControlledObjectiveTerm term;
    term.value = [t](const Vector& x, const Vector& u) { return 0.5 * (x - t).squaredNorm() + 0.5 * u.squaredNorm(); };
    term.grad_state = [t](const Vector& x, const Vector&) { return (x - t).eval(); };
    term.grad_control = [](const Vector&, const Vector& u) { return u; };
    terms.push_back(std::move(term));
  }
  ControlledDynamicsMap dyn;
  dyn.value = [a, b](const Vector& x, const Vector& u) { return (a * x + b * u).eval(); };
  dyn.jtprod_state = [a](const Vector&, const Vector&, const Vector& w) { return (a.transpose() * w).eval(); };
  dyn.jtprod_control = [b](const Vector&, const Vector&, const Vector& w) { return (b.transpose() * w).eval(); };
  const auto identity_projection = [](const Vector& u) { return u; };

  ControlledProblem problem(n, dx, du, std::move(terms), std::move(dyn), x0, identity_projection);

  // Unknown layout: x_1..x_n | u_0..u_n | lambda_0..lambda_{n-1}.
  const int nx = n * dx, nu = (n + 1) * du, nl = n * dx;
  const int total = nx + nu + nl;
  Matrix k = Matrix::Zero(total, total);
  Vector rhs = Vector::Zero(total);
  const auto xi = [dx](int i) { return (i - 1) * dx; };
  const auto uq = [nx, du](int q) { return nx + q * du; };
  const auto lj = [nx, nu, dx](int j) { return nx + nu + j * dx; };

  // State stationarity: (x_i - t_i) + lambda_{i-1} - A^T lambda_i = 0.
  for (int i = 1; i <= n; ++i) {
    const int row = xi(i);
    k.block(row, xi(i), dx, dx) = Matrix::Identity(dx, dx);
    k.block(row, lj(i - 1), dx, dx) = Matrix::Identity(dx, dx);
    if (i <= n - 1) k.block(row, lj(i), dx, dx) = -a.transpose();
    rhs.segment(row, dx) = targets[static_cast<std::size_t>(i)];
  }
  // Control stationarity: u_q - B^T lambda_q = 0 (u_n free of dynamics).
  for (int q = 0; q <= n; ++q) {
    const int row = uq(q);
    k.block(row, uq(q), du, du) = Matrix::Identity(du, du);
    if (q <= n - 1) k.block(row, lj(q), du, dx) = -b.transpose();
  }
  // Dynamics: x_{j+1} - A x_j - B u_j = 0 with x_0 moved to the rhs.
  for (int j = 0; j < n; ++j) {
    const int row = lj(j);
    k.block(row, xi(j + 1), dx, dx) = Matrix::Identity(dx, dx);
    if (j >= 1) k.block(row, xi(j), dx, dx) = -a;
    k.block(row, uq(j), dx, du) = -b;
    if (j == 0) rhs.segment(row, dx) = a * x0;
  }

  const Vector sol = k.partialPivLu().solve(rhs);
  LqControlOracle oracle{std::move(problem), Trajectory(n + 1, dx), ControlSequence(n + 1, du),
                         DualVariables(n, dx)};
  oracle.x_star[0] = x0;
  for (int i = 1; i <= n; ++i) oracle.x_star[i] = sol.segment(xi(i), dx);
  for (int q = 0; q <= n; ++q) oracle.u_star[q] = sol.segment(uq(q), du);
  for (int j = 0; j < n; ++j) oracle.lambda_star[j] = sol.segment(lj(j), dx);
  return oracle;
}

}  // namespace padmm::testing
