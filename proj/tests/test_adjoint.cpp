#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "padmm/adjoint.hpp"
#include "padmm/gradcheck.hpp"
#include "padmm/lorenz.hpp"
#include "support/test_instances.hpp"

#include <cmath>

using namespace padmm;

namespace {

DynamicsProblem lorenz_problem(int n, std::uint64_t seed = 3) {
  lorenz::LorenzConfig config;
  config.horizon = n * config.dt;
  config.observe_every = n;  // observations at both ends only
  auto [problem, data] = lorenz::make_4dvar_problem(config, seed);
  return std::move(problem);
}

}  // namespace

TEST_CASE("reduced_objective") {
  SUBCASE("zero terms give zero") {
    std::vector<ObjectiveTerm> terms(5, ObjectiveTerm::zero());
    auto problem = DynamicsProblem::explicit_forward(4, 2, std::move(terms), DynamicsMap::identity());
    CHECK(reduced_objective(problem, Vector::Constant(2, 3.0)) == 0.0);
  }

  SUBCASE("equals the objective of the rollout") {
    Rng rng(61);
    auto inst = testing::random_explicit_instance(rng, 5, 3);
    const Vector v0 = rng.uniform_vector(3, -0.5, 0.5);
    CHECK(reduced_objective(inst.problem, v0) ==
          evaluate_objective(inst.problem, feasibility_rollout(inst.problem, v0)));
  }

  SUBCASE("implicit shape is rejected") {
    std::vector<ObjectiveTerm> terms(3, ObjectiveTerm::zero());
    auto problem = DynamicsProblem::implicit_backward(2, 1, std::move(terms), DynamicsMap::identity());
    CHECK_THROWS_AS(reduced_objective(problem, Vector::Zero(1)), ParameterError);
  }
}

TEST_CASE("adjoint_gradient") {
  SUBCASE("zero terms give a zero gradient") {
    std::vector<ObjectiveTerm> terms(5, ObjectiveTerm::zero());
    auto problem = DynamicsProblem::explicit_forward(4, 2, std::move(terms), DynamicsMap::identity());
    CHECK(adjoint_gradient(problem, Vector::Constant(2, 3.0)).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("no dynamics (n = 0): gradient reduces to the local term gradient") {
    std::vector<ObjectiveTerm> terms;
    terms.push_back(ObjectiveTerm::squared_distance(Vector::Constant(2, 1.5)));
    auto problem = DynamicsProblem::explicit_forward(0, 2, std::move(terms), DynamicsMap::identity());
    const Vector v0 = Vector::Constant(2, -0.5);
    const Vector g = adjoint_gradient(problem, v0);
    CHECK((g - (v0.array() - 1.5).matrix()).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("matches central finite differences on the chaotic instance, n = 20") {
    auto problem = lorenz_problem(20);
    Rng rng(62);
    for (int p = 0; p < 10; ++p) {
      const Vector v0 = (Vector(3) << -0.5, 0.5, 20.5).finished() + rng.uniform_vector(3, -0.5, 0.5);
      const auto value = [&](const Vector& z) { return reduced_objective(problem, z); };
      const Vector fd = finite_difference_gradient(value, v0);
      CHECK(relative_gradient_error(adjoint_gradient(problem, v0), fd) <= 1e-5);
    }
  }

  SUBCASE("matches finite differences on smooth random instances") {
    Rng rng(63);
    for (int trial = 0; trial < 5; ++trial) {
      auto inst = testing::random_explicit_instance(rng, 6, 3);
      const Vector v0 = rng.uniform_vector(3, -0.5, 0.5);
      const auto value = [&](const Vector& z) { return reduced_objective(inst.problem, z); };
      const Vector fd = finite_difference_gradient(value, v0);
      CHECK(relative_gradient_error(adjoint_gradient(inst.problem, v0), fd) <= 1e-4);
    }
  }

  SUBCASE("linear dynamics with quadratic terms: matches the closed-form reduced gradient") {
    Rng rng(64);
    Matrix a(2, 2);
    a << 0.9, 0.2, -0.1, 0.8;
    std::vector<Vector> targets;
    const int n = 5;
    for (int i = 0; i <= n; ++i) targets.push_back(rng.uniform_vector(2, -1.0, 1.0));
    std::vector<ObjectiveTerm> terms;
    for (const Vector& t : targets) terms.push_back(ObjectiveTerm::squared_distance(t));
    auto problem = DynamicsProblem::explicit_forward(n, 2, std::move(terms), DynamicsMap::linear(a));

    const Vector v0 = rng.uniform_vector(2, -1.0, 1.0);
    // Closed form: sum_i (A^i)^T (A^i v0 - t_i).
    Vector expected = Vector::Zero(2);
    Matrix power = Matrix::Identity(2, 2);
    for (int i = 0; i <= n; ++i) {
      expected += power.transpose() * (power * v0 - targets[static_cast<std::size_t>(i)]);
      power = a * power;
    }
    CHECK((adjoint_gradient(problem, v0) - expected).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("polak_ribiere_cg") {
  SUBCASE("convex quadratic in R^3 reaches the minimizer within a few iterations") {
    // n = 0 reduces the problem to plain minimization of f_0.
    Matrix q(3, 3);
    q << 4.0, 0.5, 0.0, 0.5, 2.0, 0.3, 0.0, 0.3, 1.0;
    const Vector target = (Vector(3) << 1.0, -2.0, 0.5).finished();
    std::vector<ObjectiveTerm> terms;
    terms.push_back(testing::quadratic_term(q, target));
    auto problem = DynamicsProblem::explicit_forward(0, 3, std::move(terms), DynamicsMap::identity());

    DriverOptions options;
    options.max_iterations = 60;
    options.gradient_tol = 1e-9;
    const auto result = polak_ribiere_cg(problem, Vector::Zero(3), options);
    CHECK(result.status == "gradient-tolerance");
    CHECK((result.solution - target).cwiseAbs().maxCoeff() <= 1e-6);
  }

  SUBCASE("objective trace is monotonically nonincreasing on the chaotic instance") {
    auto problem = lorenz_problem(30, 9);
    DriverOptions options;
    options.max_iterations = 40;
    const Vector start = (Vector(3) << -0.2, 0.8, 20.0).finished();
    const auto result = polak_ribiere_cg(problem, start, options);
    REQUIRE(result.trace.size() >= 2);
    for (std::size_t k = 1; k < result.trace.size(); ++k) {
      CHECK(result.trace[k].objective <= result.trace[k - 1].objective + 1e-12);
    }
  }
}

TEST_CASE("lbfgs") {
  SUBCASE("convex quadratic: gradient norm below 1e-10 within 20 iterations") {
    Matrix q(3, 3);
    q << 4.0, 0.5, 0.0, 0.5, 2.0, 0.3, 0.0, 0.3, 1.0;
    const Vector target = (Vector(3) << 1.0, -2.0, 0.5).finished();
    std::vector<ObjectiveTerm> terms;
    terms.push_back(testing::quadratic_term(q, target));
    auto problem = DynamicsProblem::explicit_forward(0, 3, std::move(terms), DynamicsMap::identity());

    DriverOptions options;
    options.max_iterations = 20;
    options.gradient_tol = 1e-10;
    const auto result = lbfgs(problem, Vector::Zero(3), options);
    CHECK(result.status == "gradient-tolerance");
    CHECK(result.gradient_norm <= 1e-10);
  }

  SUBCASE("matches the conjugate-gradient objective on a smooth convex instance") {
    Rng rng(65);
    Matrix a(2, 2);
    a << 0.7, 0.1, -0.1, 0.6;
    std::vector<Vector> targets;
    for (int i = 0; i <= 6; ++i) targets.push_back(rng.uniform_vector(2, -1.0, 1.0));
    std::vector<ObjectiveTerm> terms;
    for (const Vector& t : targets) terms.push_back(ObjectiveTerm::squared_distance(t));
    auto problem = DynamicsProblem::explicit_forward(6, 2, std::move(terms), DynamicsMap::linear(a));

    DriverOptions options;
    options.max_iterations = 200;
    options.gradient_tol = 1e-10;
    const Vector start = rng.uniform_vector(2, -1.0, 1.0);
    const auto cg = polak_ribiere_cg(problem, start, options);
    const auto qn = lbfgs(problem, start, options);
    CHECK(std::abs(cg.objective - qn.objective) <= 1e-3 * (1.0 + std::abs(cg.objective)));
  }

  SUBCASE("objective trace is monotonically nonincreasing on the chaotic instance") {
    auto problem = lorenz_problem(30, 10);
    DriverOptions options;
    options.max_iterations = 40;
    const Vector start = (Vector(3) << -0.2, 0.8, 20.0).finished();
    const auto result = lbfgs(problem, start, options);
    REQUIRE(result.trace.size() >= 2);
    for (std::size_t k = 1; k < result.trace.size(); ++k) {
      CHECK(result.trace[k].objective <= result.trace[k - 1].objective + 1e-12);
    }
  }
}
