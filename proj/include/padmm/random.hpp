#pragma once

#include "padmm/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace padmm {

/// Seeded random source with fully pinned output streams.
///
/// Uniform doubles are drawn as (x >> 11) * 2^-53 from a mersenne-twister-64
/// stream and Gaussian variates use the Box-Muller transform on two such
/// uniforms. Both are spelled out here (rather than using the standard
/// distributions) so that a recorded seed reproduces every sample bitwise on
/// any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; one transform yields two variates.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    spare_ = radius * std::sin(two_pi * u2);
    have_spare_ = true;
    return radius * std::cos(two_pi * u2);
  }

  Vector uniform_vector(int dim, double lo, double hi) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = uniform(lo, hi);
    return v;
  }

  /// Componentwise uniform inside [lo, hi] boxes.
  Vector uniform_vector(const Vector& lo, const Vector& hi) {
    Vector v(lo.size());
    for (int i = 0; i < lo.size(); ++i) v[i] = uniform(lo[i], hi[i]);
    return v;
  }

  Vector gaussian_vector(int dim) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = gaussian();
    return v;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace padmm
