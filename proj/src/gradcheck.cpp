#include "padmm/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace padmm {

Vector finite_difference_gradient(const std::function<double(const Vector&)>& value, const Vector& x) {
  const double h = 1e-6 * (1.0 + x.norm());
  Vector g(x.size());
  Vector probe = x;
  for (int k = 0; k < x.size(); ++k) {
    const double saved = probe[k];
    probe[k] = saved + h;
    const double fp = value(probe);
    probe[k] = saved - h;
    const double fm = value(probe);
    probe[k] = saved;
    g[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double relative_gradient_error(const Vector& a, const Vector& b) {
  const double denom = 1.0 + (b.size() > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
  const double num = a.size() > 0 ? (a - b).cwiseAbs().maxCoeff() : 0.0;
  return num / denom;
}

double GradCheckReport::max_relative_error() const {
  double m = 0.0;
  for (const GradCheckItem& it : items) m = std::max(m, it.max_relative_error);
  return m;
}

GradCheckReport check_problem_derivatives(const DynamicsProblem& problem, const Trajectory& center, double radius,
                                          int probes, Rng& rng) {
  problem.check_trajectory(center);
  const int d = problem.dimension();
  GradCheckReport report;

  for (int i = 0; i <= problem.transition_count(); ++i) {
    GradCheckItem item;
    item.label = "objective term " + std::to_string(i);
    for (int p = 0; p < probes; ++p) {
      const Vector x = center[i] + rng.uniform_vector(d, -radius, radius);
      const Vector fd = finite_difference_gradient(problem.term(i).value, x);
      item.max_relative_error = std::max(item.max_relative_error, relative_gradient_error(problem.term(i).gradient(x), fd));
      ++item.probes;
    }
    report.items.push_back(std::move(item));
  }

  const int map_count = problem.shape() == ConstraintShape::SemiImplicit ? problem.transition_count() : 1;
  for (int j = 0; j < map_count; ++j) {
    const DynamicsMap& map = problem.step_map(j);
    GradCheckItem item;
    item.label = map_count == 1 ? std::string("dynamics map") : "dynamics map " + std::to_string(j);
    for (int p = 0; p < probes; ++p) {
      const int anchor = std::min(j, problem.transition_count());
      const Vector x = center[anchor] + rng.uniform_vector(d, -radius, radius);
      const Vector w = rng.gaussian_vector(d);
      // grad_z <w, phi(z)> equals grad phi(z)^T w, so one scalar-valued
      // finite-difference gradient checks the full transpose-product.
      const auto dir = [&](const Vector& z) { return w.dot(map.value(z)); };
      const Vector fd = finite_difference_gradient(dir, x);
      item.max_relative_error = std::max(item.max_relative_error, relative_gradient_error(map.jtprod(x, w), fd));
      ++item.probes;
    }
    report.items.push_back(std::move(item));
  }
  return report;
}

}  // namespace padmm
