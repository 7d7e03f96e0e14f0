#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "padmm/gradcheck.hpp"
#include "padmm/lagrangian.hpp"
#include "padmm/random.hpp"
#include "support/test_instances.hpp"

#include <cmath>

using namespace padmm;

namespace {

DynamicsProblem tiny_identity_problem(int n, int d) {
  std::vector<ObjectiveTerm> terms(static_cast<std::size_t>(n) + 1, ObjectiveTerm::zero());
  return DynamicsProblem::explicit_forward(n, d, std::move(terms), DynamicsMap::identity());
}

}  // namespace

TEST_CASE("lagrangian value") {
  SUBCASE("zero multipliers reduce to the objective") {
    Rng rng(1);
    auto inst = testing::random_explicit_instance(rng, 5, 3);
    DualVariables zero(5, 3);
    CHECK(lagrangian_value(inst.problem, inst.x, zero) ==
          doctest::Approx(evaluate_objective(inst.problem, inst.x)).epsilon(1e-14));
  }

  SUBCASE("feasible point: multipliers contribute nothing") {
    Rng rng(2);
    auto inst = testing::random_explicit_instance(rng, 5, 3);
    const Trajectory x = feasibility_rollout(inst.problem, rng.uniform_vector(3, -0.5, 0.5));
    const double with = lagrangian_value(inst.problem, x, inst.lambda);
    const double objective = evaluate_objective(inst.problem, x);
    CHECK(std::abs(with - objective) <= 1e-9 * (1.0 + std::abs(objective)));
  }

  SUBCASE("hand arithmetic: f=0, phi=id, x=(0,1), lambda=2 -> 2") {
    auto problem = tiny_identity_problem(1, 1);
    Trajectory x(2, 1);
    x[0][0] = 0.0;
    x[1][0] = 1.0;
    DualVariables lambda(1, 1);
    lambda[0][0] = 2.0;
    CHECK(lagrangian_value(problem, x, lambda) == doctest::Approx(2.0).epsilon(1e-15));
  }
}

TEST_CASE("augmented lagrangian: the two algebraic forms agree") {
  SUBCASE("hand arithmetic: f=0, phi=id, x=(0,1), lambda=1, rho=2 -> 2") {
    auto problem = tiny_identity_problem(1, 1);
    Trajectory x(2, 1);
    x[0][0] = 0.0;
    x[1][0] = 1.0;
    DualVariables lambda(1, 1);
    lambda[0][0] = 1.0;
    const PenaltyVector rho = PenaltyVector::constant(1, 2.0);
    CHECK(augmented_lagrangian_value(problem, x, lambda, rho) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(augmented_lagrangian_value_completed_square(problem, x, lambda, rho) ==
          doctest::Approx(2.0).epsilon(1e-15));
  }

  SUBCASE("100 random instances, relative 1e-12") {
    Rng rng(42);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 1 + static_cast<int>(rng.uniform(0.0, 10.0));
      const int d = 1 + static_cast<int>(rng.uniform(0.0, 5.0));
      auto inst = testing::random_explicit_instance(rng, n, d);
      const double a = augmented_lagrangian_value(inst.problem, inst.x, inst.lambda, inst.rho);
      const double b = augmented_lagrangian_value_completed_square(inst.problem, inst.x, inst.lambda, inst.rho);
      CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)));
    }
  }

  SUBCASE("nonpositive penalty is rejected") {
    auto problem = tiny_identity_problem(1, 1);
    Trajectory x(2, 1);
    DualVariables lambda(1, 1);
    Eigen::ArrayXd bad(1);
    bad << -0.5;
    CHECK_THROWS_AS(PenaltyVector{bad}, ParameterError);
  }
}

TEST_CASE("penalized and penalty-free values are linked by the quadratic term") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = testing::random_explicit_instance(rng, 4, 3);
    double penalty = 0.0;
    int j = 0;
    for (const Vector& r : constraint_residuals(inst.problem, inst.x)) {
      penalty += 0.5 * inst.rho[j++] * r.squaredNorm();
    }
    const double lhs = lagrangian_value(inst.problem, inst.x, inst.lambda);
    const double rhs = augmented_lagrangian_value(inst.problem, inst.x, inst.lambda, inst.rho) - penalty;
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("block gradients of the augmented lagrangian match finite differences") {
  Rng rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    auto inst = testing::random_explicit_instance(rng, 4, 3);
    for (int i = 0; i <= 4; ++i) {
      const auto value_in_block = [&](const Vector& z) {
        Trajectory y = inst.x;
        y[i] = z;
        return augmented_lagrangian_value(inst.problem, y, inst.lambda, inst.rho);
      };
      const Vector fd = finite_difference_gradient(value_in_block, inst.x[i]);
      const Vector g = aug_lagrangian_block_gradient(inst.problem, inst.x, inst.lambda, inst.rho, i);
      CHECK(relative_gradient_error(g, fd) <= 1e-5);
    }
  }
}

TEST_CASE("block gradients for the implicit and semi-implicit shapes match finite differences") {
  Rng rng(13);
  const int n = 3, d = 2;

  SUBCASE("implicit") {
    std::vector<ObjectiveTerm> terms;
    for (int i = 0; i <= n; ++i) terms.push_back(ObjectiveTerm::squared_distance(rng.uniform_vector(d, -1.0, 1.0)));
    Matrix w(d, d);
    w << 0.4, -0.2, 0.1, 0.5;
    auto map = testing::smooth_map(w, Vector::Constant(d, 0.3), Vector::Zero(d));
    auto problem = DynamicsProblem::implicit_backward(n, d, std::move(terms), std::move(map));
    Trajectory x(n + 1, d);
    for (int i = 0; i <= n; ++i) x[i] = rng.uniform_vector(d, -1.0, 1.0);
    DualVariables lambda(n, d);
    for (int j = 0; j < n; ++j) lambda[j] = rng.uniform_vector(d, -1.0, 1.0);
    const PenaltyVector rho = PenaltyVector::constant(n, 0.7);
    for (int i = 0; i <= n; ++i) {
      const auto value_in_block = [&](const Vector& z) {
        Trajectory y = x;
        y[i] = z;
        return augmented_lagrangian_value(problem, y, lambda, rho);
      };
      const Vector fd = finite_difference_gradient(value_in_block, x[i]);
      CHECK(relative_gradient_error(aug_lagrangian_block_gradient(problem, x, lambda, rho, i), fd) <= 1e-5);
    }
  }

  SUBCASE("semi-implicit") {
    std::vector<ObjectiveTerm> terms;
    for (int i = 0; i <= n; ++i) terms.push_back(ObjectiveTerm::squared_distance(rng.uniform_vector(d, -1.0, 1.0)));
    Matrix a(d, d);
    a << 1.5, 0.2, -0.1, 2.0;
    Matrix w(d, d);
    w << 0.3, 0.1, -0.2, 0.6;
    std::vector<SemiImplicitStep> steps(
        static_cast<std::size_t>(n),
        SemiImplicitStep{a, testing::smooth_map(w, Vector::Constant(d, 0.2), Vector::Zero(d))});
    auto problem = DynamicsProblem::semi_implicit(n, d, std::move(terms), std::move(steps));
    Trajectory x(n + 1, d);
    for (int i = 0; i <= n; ++i) x[i] = rng.uniform_vector(d, -1.0, 1.0);
    DualVariables lambda(n, d);
    for (int j = 0; j < n; ++j) lambda[j] = rng.uniform_vector(d, -1.0, 1.0);
    const PenaltyVector rho = PenaltyVector::constant(n, 1.3);
    for (int i = 0; i <= n; ++i) {
      const auto value_in_block = [&](const Vector& z) {
        Trajectory y = x;
        y[i] = z;
        return augmented_lagrangian_value(problem, y, lambda, rho);
      };
      const Vector fd = finite_difference_gradient(value_in_block, x[i]);
      CHECK(relative_gradient_error(aug_lagrangian_block_gradient(problem, x, lambda, rho, i), fd) <= 1e-5);
    }
  }
}

TEST_CASE("boundary block n expands to the stated formula") {
  Rng rng(31);
  auto inst = testing::random_explicit_instance(rng, 4, 3);
  const int n = 4;
  const Vector r = constraint_residual(inst.problem, inst.x, n - 1);
  const Vector expected = inst.problem.term(n).gradient(inst.x[n]) + inst.rho[n - 1] * r + inst.lambda[n - 1];
  const Vector got = aug_lagrangian_block_gradient(inst.problem, inst.x, inst.lambda, inst.rho, n);
  CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("zero objective + feasible + zero duals -> zero block gradients") {
  auto problem = tiny_identity_problem(3, 2);
  Trajectory x(4, 2);
  for (int i = 0; i < 4; ++i) x[i] = Vector::Constant(2, 0.4);
  DualVariables lambda(3, 2);
  const PenaltyVector rho = PenaltyVector::constant(3, 1.0);
  for (int i = 0; i <= 3; ++i) {
    CHECK(aug_lagrangian_block_gradient(problem, x, lambda, rho, i).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("kkt residual") {
  SUBCASE("zero everywhere on a feasible zero-objective instance") {
    auto problem = tiny_identity_problem(3, 2);
    Trajectory x(4, 2);
    for (int i = 0; i < 4; ++i) x[i] = Vector::Constant(2, -0.3);
    DualVariables lambda(3, 2);
    const KktResidual res = kkt_residual(problem, x, lambda);
    CHECK(res.stationarity == 0.0);
    CHECK(res.feasibility == 0.0);
  }

  SUBCASE("feasible point has zero feasibility component for any duals") {
    Rng rng(3);
    auto inst = testing::random_explicit_instance(rng, 4, 3);
    const Trajectory x = feasibility_rollout(inst.problem, rng.uniform_vector(3, -0.5, 0.5));
    CHECK(kkt_residual(inst.problem, x, inst.lambda).feasibility <= 1e-12);
  }

  SUBCASE("closed-form LQ pair satisfies both components") {
    Matrix a(2, 2);
    a << 0.9, 0.2, -0.1, 0.8;
    std::vector<Vector> targets;
    Rng rng(17);
    for (int i = 0; i <= 4; ++i) targets.push_back(rng.uniform_vector(2, -1.0, 1.0));
    const auto oracle = testing::lq_oracle(a, targets);
    const KktResidual res = kkt_residual(oracle.problem, oracle.x_star, oracle.lambda_star);
    CHECK(res.stationarity <= 1e-8);
    CHECK(res.feasibility <= 1e-8);
  }
}

TEST_CASE("lyapunov value") {
  Rng rng(23);
  auto inst = testing::random_explicit_instance(rng, 4, 3);

  SUBCASE("equal iterates reduce to the augmented lagrangian") {
    const double e = lyapunov_value(inst.problem, inst.x, inst.x, inst.lambda, inst.rho, inst.eta);
    CHECK(e == augmented_lagrangian_value(inst.problem, inst.x, inst.lambda, inst.rho));
  }

  SUBCASE("hand arithmetic: unit difference in block 0, eta_0 = 1 -> 1/4") {
    auto problem = tiny_identity_problem(2, 3);
    Trajectory x_now(3, 3);
    for (int i = 0; i < 3; ++i) x_now[i] = Vector::Constant(3, 0.9);
    Trajectory x_prev = x_now;
    x_prev[0][0] += 1.0;
    DualVariables lambda(2, 3);
    const PenaltyVector rho = PenaltyVector::constant(2, 1.0);
    const Eigen::ArrayXd eta = Eigen::ArrayXd::Ones(3);
    CHECK(lyapunov_value(problem, x_now, x_prev, lambda, rho, eta) == doctest::Approx(0.25).epsilon(1e-15));
  }

  SUBCASE("nonpositive eta is rejected") {
    Eigen::ArrayXd eta = inst.eta;
    eta[2] = 0.0;
    CHECK_THROWS_AS(lyapunov_value(inst.problem, inst.x, inst.x, inst.lambda, inst.rho, eta), ParameterError);
  }
}
