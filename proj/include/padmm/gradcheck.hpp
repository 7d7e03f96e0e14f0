#pragma once

#include "padmm/problem.hpp"
#include "padmm/random.hpp"

#include <functional>
#include <string>
#include <vector>

namespace padmm {

/// Central finite-difference gradient with step h = 1e-6 * (1 + ||x||).
Vector finite_difference_gradient(const std::function<double(const Vector&)>& value, const Vector& x);

/// Guarded relative distance ||a - b||_inf / (1 + ||b||_inf).
double relative_gradient_error(const Vector& a, const Vector& b);

struct GradCheckItem {
  std::string label;
  double max_relative_error = 0.0;
  int probes = 0;
};

struct GradCheckReport {
  std::vector<GradCheckItem> items;
  double max_relative_error() const;
  bool pass(double tol) const { return max_relative_error() <= tol; }
};

/// Checks every registered objective gradient and dynamics transpose-product
/// against central finite differences at `probes` points drawn uniformly from
/// [-radius, radius]^d around `center` blocks.
GradCheckReport check_problem_derivatives(const DynamicsProblem& problem, const Trajectory& center, double radius,
                                          int probes, Rng& rng);

}  // namespace padmm
