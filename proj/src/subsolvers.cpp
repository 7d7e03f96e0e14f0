#include "padmm/subsolvers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace padmm {

const char* to_string(SubsolveStatus s) {
  switch (s) {
    case SubsolveStatus::GradientTolerance: return "gradient-tolerance";
    case SubsolveStatus::SimplexTolerance: return "simplex-tolerance";
    case SubsolveStatus::IterationCap: return "iteration-cap";
    case SubsolveStatus::Stalled: return "stalled";
    case SubsolveStatus::NonFiniteEvaluation: return "non-finite-evaluation";
  }
  return "unknown";
}

namespace {

SubsolveReport finish(const SubproblemSpec& spec, Vector x, double value, int iterations, SubsolveStatus status) {
  SubsolveReport report;
  report.solution = std::move(x);
  report.value = value;
  report.gradient_norm = spec.gradient ? spec.gradient(report.solution).norm() : 0.0;
  report.iterations = iterations;
  report.status = status;
  return report;
}

// The damped Gauss-Newton loop measures progress through 0.5*||r||^2, which
// can disagree with the direct value route by a few ulps. The descent
// contract is stated in the value route, so fall back to the warm start when
// the rounding difference flips the comparison.
SubsolveReport finish_against_warm(const SubproblemSpec& spec, Vector x, double value, int iterations,
                                   SubsolveStatus status) {
  if (spec.value) {
    const double direct = spec.value(x);
    const double warm = spec.value(spec.warm_start);
    if (!(direct <= warm)) return finish(spec, spec.warm_start, warm, iterations, status);
    value = direct;
  }
  return finish(spec, std::move(x), value, iterations, status);
}

}  // namespace

SubsolveReport levenberg_marquardt(const SubproblemSpec& spec) {
  if (!spec.residual) throw ParameterError("levenberg_marquardt: residual view required");
  const bool sparse = static_cast<bool>(spec.sparse_residual_jacobian);

  Vector x = spec.warm_start;
  Vector r = spec.residual(x);
  if (!r.allFinite()) {
    return finish(spec, x, spec.value ? spec.value(x) : std::numeric_limits<double>::quiet_NaN(), 0,
                  SubsolveStatus::NonFiniteEvaluation);
  }
  double value = 0.5 * r.squaredNorm();
  double mu = -1.0;  // initialized from the first J^T J diagonal below

  Matrix jtj_dense;
  Eigen::SparseMatrix<double> jtj_sparse;
  Vector g(spec.dimension);

  for (int iter = 0; iter < spec.iteration_cap; ++iter) {
    if (sparse) {
      const Eigen::SparseMatrix<double> j = spec.sparse_residual_jacobian(x);
      jtj_sparse = j.transpose() * j;
      g = j.transpose() * r;
    } else {
      const Matrix j = spec.residual_jacobian(x);
      jtj_dense.noalias() = j.transpose() * j;
      g.noalias() = j.transpose() * r;
    }
    if (g.norm() <= spec.inner_tolerance) {
      return finish_against_warm(spec, std::move(x), value, iter, SubsolveStatus::GradientTolerance);
    }
    double max_diag = 0.0;
    if (sparse) {
      for (int k = 0; k < jtj_sparse.rows(); ++k) max_diag = std::max(max_diag, jtj_sparse.coeff(k, k));
    } else {
      max_diag = jtj_dense.diagonal().maxCoeff();
    }
    if (mu < 0.0) mu = 1e-3 * std::max(max_diag, 1.0);

    // Inner damping loop: retry with tenfold damping until a step reduces the
    // objective or the damping blows past any useful scale.
    bool accepted = false;
    while (!accepted) {
      Vector delta;
      if (sparse) {
        Eigen::SparseMatrix<double> m = jtj_sparse;
        for (int k = 0; k < m.rows(); ++k) m.coeffRef(k, k) += mu;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(m);
        if (chol.info() != Eigen::Success) {
          mu *= 10.0;
          if (mu > 1e40) return finish_against_warm(spec, std::move(x), value, iter, SubsolveStatus::Stalled);
          continue;
        }
        delta = -chol.solve(g);
      } else {
        Matrix m = jtj_dense;
        m.diagonal().array() += mu;
        delta = -m.ldlt().solve(g);
      }
      if (!delta.allFinite()) {
        mu *= 10.0;
        if (mu > 1e40) return finish_against_warm(spec, std::move(x), value, iter, SubsolveStatus::Stalled);
        continue;
      }
      if (delta.norm() <= 1e-15 * (1.0 + x.norm())) {
        return finish_against_warm(spec, std::move(x), value, iter, SubsolveStatus::Stalled);
      }
      const Vector x_trial = x + delta;
      const Vector r_trial = spec.residual(x_trial);
      const double value_trial = r_trial.allFinite() ? 0.5 * r_trial.squaredNorm() : std::numeric_limits<double>::infinity();
      if (value_trial < value) {  // gain-ratio threshold 0
        x = x_trial;
        r = r_trial;
        value = value_trial;
        mu = std::max(mu * 0.1, 1e-14 * std::max(max_diag, 1.0));
        accepted = true;
      } else {
        mu *= 10.0;
        if (mu > 1e40) {
          return finish_against_warm(
              spec, std::move(x), value, iter,
              std::isfinite(value_trial) ? SubsolveStatus::Stalled : SubsolveStatus::NonFiniteEvaluation);
        }
      }
    }
  }
  return finish_against_warm(spec, std::move(x), value, spec.iteration_cap, SubsolveStatus::IterationCap);
}

SubsolveReport descent_fallback(const SubproblemSpec& spec) {
  if (!spec.gradient) throw ParameterError("descent_fallback: gradient callback required");
  constexpr double armijo_c = 1e-4;

  Vector x = spec.warm_start;
  double value = spec.value(x);
  if (!std::isfinite(value)) return finish(spec, std::move(x), value, 0, SubsolveStatus::NonFiniteEvaluation);
  double step = 1.0;

  for (int iter = 0; iter < spec.iteration_cap; ++iter) {
    const Vector g = spec.gradient(x);
    const double gnorm = g.norm();
    if (gnorm <= spec.inner_tolerance) {
      return finish(spec, std::move(x), value, iter, SubsolveStatus::GradientTolerance);
    }
    double t = 2.0 * step;
    bool moved = false;
    while (t > 1e-20) {
      const Vector x_trial = x - t * g;
      const double value_trial = spec.value(x_trial);
      if (std::isfinite(value_trial) && value_trial <= value - armijo_c * t * gnorm * gnorm) {
        x = x_trial;
        value = value_trial;
        step = t;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) return finish(spec, std::move(x), value, iter, SubsolveStatus::Stalled);
  }
  return finish(spec, std::move(x), value, spec.iteration_cap, SubsolveStatus::IterationCap);
}

SubsolveReport nelder_mead(const SubproblemSpec& spec, int dimension_cap) {
  if (spec.dimension > dimension_cap) {
    throw ConfigError("nelder_mead: dimension " + std::to_string(spec.dimension) + " exceeds the cap " +
                      std::to_string(dimension_cap));
  }
  const int d = spec.dimension;
  const double warm_value = spec.value(spec.warm_start);

  struct Vertex {
    Vector point;
    double value;
  };
  std::vector<Vertex> simplex;
  simplex.reserve(static_cast<std::size_t>(d) + 1);
  simplex.push_back({spec.warm_start, warm_value});
  for (int k = 0; k < d; ++k) {
    Vector v = spec.warm_start;
    v[k] += 0.05 * (1.0 + std::abs(v[k]));
    simplex.push_back({v, spec.value(v)});
  }
  const auto by_value = [](const Vertex& a, const Vertex& b) { return a.value < b.value; };
  std::sort(simplex.begin(), simplex.end(), by_value);

  const auto diameter = [&]() {
    double m = 0.0;
    for (std::size_t a = 0; a + 1 < simplex.size(); ++a) {
      for (std::size_t b = a + 1; b < simplex.size(); ++b) {
        m = std::max(m, (simplex[a].point - simplex[b].point).norm());
      }
    }
    return m;
  };

  int iter = 0;
  SubsolveStatus status = SubsolveStatus::IterationCap;
  for (; iter < spec.iteration_cap; ++iter) {
    if (diameter() <= spec.inner_tolerance) {
      status = SubsolveStatus::SimplexTolerance;
      break;
    }
    Vector centroid = Vector::Zero(d);
    for (std::size_t a = 0; a + 1 < simplex.size(); ++a) centroid += simplex[a].point;
    centroid /= static_cast<double>(d);

    const Vertex& worst = simplex.back();
    const Vector reflected = centroid + (centroid - worst.point);
    const double f_reflected = spec.value(reflected);

    if (f_reflected < simplex.front().value) {
      const Vector expanded = centroid + 2.0 * (centroid - worst.point);
      const double f_expanded = spec.value(expanded);
      simplex.back() = f_expanded < f_reflected ? Vertex{expanded, f_expanded} : Vertex{reflected, f_reflected};
    } else if (f_reflected < simplex[simplex.size() - 2].value) {
      simplex.back() = {reflected, f_reflected};
    } else {
      const bool outside = f_reflected < worst.value;
      const Vector base = outside ? reflected : worst.point;
      const Vector contracted = centroid + 0.5 * (base - centroid);
      const double f_contracted = spec.value(contracted);
      if (f_contracted < std::min(f_reflected, worst.value)) {
        simplex.back() = {contracted, f_contracted};
      } else {
        for (std::size_t a = 1; a < simplex.size(); ++a) {
          simplex[a].point = simplex.front().point + 0.5 * (simplex[a].point - simplex.front().point);
          simplex[a].value = spec.value(simplex[a].point);
        }
      }
    }
    std::sort(simplex.begin(), simplex.end(), by_value);
  }

  // Descent contract: hand back the best vertex only when it beats the warm start.
  if (simplex.front().value <= warm_value) {
    return finish(spec, simplex.front().point, simplex.front().value, iter, status);
  }
  return finish(spec, spec.warm_start, warm_value, iter, status);
}

SubsolveReport projected_descent(const SubproblemSpec& spec, const std::function<Vector(const Vector&)>& project) {
  if (!project) throw ConfigError("projected_descent: projection callback missing");
  constexpr double armijo_c = 1e-4;

  Vector x = project(spec.warm_start);
  double value = spec.value(x);
  if (!std::isfinite(value)) return finish(spec, std::move(x), value, 0, SubsolveStatus::NonFiniteEvaluation);
  double step = 1.0;

  for (int iter = 0; iter < spec.iteration_cap; ++iter) {
    const Vector g = spec.gradient(x);
    // Gradient-mapping stationarity at unit step.
    const double mapping = (x - project(x - g)).norm();
    if (mapping <= spec.inner_tolerance) {
      return finish(spec, std::move(x), value, iter, SubsolveStatus::GradientTolerance);
    }
    double t = 2.0 * step;
    bool moved = false;
    while (t > 1e-20) {
      const Vector x_trial = project(x - t * g);
      const double value_trial = spec.value(x_trial);
      const double decrease = g.dot(x - x_trial);
      if (std::isfinite(value_trial) && value_trial <= value - armijo_c * decrease && decrease >= 0.0) {
        x = x_trial;
        value = value_trial;
        step = t;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) return finish(spec, std::move(x), value, iter, SubsolveStatus::Stalled);
  }
  return finish(spec, std::move(x), value, spec.iteration_cap, SubsolveStatus::IterationCap);
}

SubsolveReport solve_subproblem(const SubproblemSpec& spec, const SubsolverOptions& options) {
  SubsolverKind kind = options.kind;
  if (kind == SubsolverKind::Auto) {
    kind = spec.has_least_squares() ? SubsolverKind::LevenbergMarquardt : SubsolverKind::DescentFallback;
  }
  switch (kind) {
    case SubsolverKind::LevenbergMarquardt: return levenberg_marquardt(spec);
    case SubsolverKind::DescentFallback: return descent_fallback(spec);
    case SubsolverKind::NelderMead: return nelder_mead(spec, options.nelder_mead_dimension_cap);
    case SubsolverKind::Auto: break;
  }
  throw ParameterError("solve_subproblem: unknown subsolver kind");
}

}  // namespace padmm
