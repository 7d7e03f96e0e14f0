#include "padmm/burgers.hpp"

#include <cmath>

namespace padmm::burgers {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Stencil {
  double advect;   // dt / (2 dx)
  double diffuse;  // nu dt / dx^2
};

Stencil stencil(const BurgersConfig& config) {
  const double dx = config.dx();
  return {config.dt / (2.0 * dx), config.viscosity * config.dt / (dx * dx)};
}

// Tridiagonal solve (Thomas algorithm); diag/sub/super are overwritten copies.
Vector solve_tridiagonal(Vector sub, Vector diag, Vector super, Vector rhs) {
  const int d = static_cast<int>(diag.size());
  for (int q = 1; q < d; ++q) {
    const double w = sub[q] / diag[q - 1];
    diag[q] -= w * super[q - 1];
    rhs[q] -= w * rhs[q - 1];
  }
  Vector x(d);
  x[d - 1] = rhs[d - 1] / diag[d - 1];
  for (int q = d - 2; q >= 0; --q) x[q] = (rhs[q] - super[q] * x[q + 1]) / diag[q];
  return x;
}

}  // namespace

double BurgersConfig::dx() const { return kPi / static_cast<double>(cells); }

int BurgersConfig::steps() const { return static_cast<int>(std::llround(horizon / dt)); }

void BurgersConfig::validate() const {
  if (cells < 3) throw ConfigError("burgers: need at least three cells");
  if (!(viscosity >= 0.0)) throw ConfigError("burgers: viscosity must be nonnegative");
  if (!(dt > 0.0) || !(horizon > 0.0)) throw ConfigError("burgers: dt and horizon must be positive");
  if (std::abs(steps() * dt - horizon) > 1e-12 * (1.0 + horizon)) {
    throw ConfigError("burgers: horizon must be an integer multiple of dt");
  }
}

Vector lf_explicit_step(const BurgersConfig& config, const Vector& u) {
  const int d = config.grid_points();
  if (u.size() != d) throw DimensionError("lf_explicit_step: wrong grid size", 0);
  const Stencil s = stencil(config);
  Vector out = Vector::Zero(d);
  for (int q = 1; q < d - 1; ++q) {
    out[q] = 0.5 * (u[q + 1] + u[q - 1]) -
             s.advect * (0.5 * u[q + 1] * u[q + 1] - 0.5 * u[q - 1] * u[q - 1]) +
             s.diffuse * (u[q + 1] - 2.0 * u[q] + u[q - 1]);
  }
  return out;
}

Vector lf_explicit_step_flux_form(const BurgersConfig& config, const Vector& u) {
  const int d = config.grid_points();
  if (u.size() != d) throw DimensionError("lf_explicit_step_flux_form: wrong grid size", 0);
  const double dx = config.dx();
  const double dt = config.dt;
  const double diffuse = config.viscosity * dt / (dx * dx);
  const auto flux = [&](int q) {
    // 0.5 (u_q^2/2 + u_{q+1}^2/2 - (dx/dt)(u_{q+1} - u_q))
    return 0.5 * (0.5 * u[q] * u[q] + 0.5 * u[q + 1] * u[q + 1] - dx / dt * (u[q + 1] - u[q]));
  };
  Vector out = Vector::Zero(d);
  for (int q = 1; q < d - 1; ++q) {
    out[q] = u[q] - dt / dx * (flux(q) - flux(q - 1)) + diffuse * (u[q + 1] - 2.0 * u[q] + u[q - 1]);
  }
  return out;
}

Vector lf_implicit_map(const BurgersConfig& config, const Vector& w) {
  const int d = config.grid_points();
  if (w.size() != d) throw DimensionError("lf_implicit_map: wrong grid size", 0);
  const Stencil s = stencil(config);
  Vector out = w;  // endpoint rows are the identity
  for (int q = 1; q < d - 1; ++q) {
    const double second_diff = w[q + 1] - 2.0 * w[q] + w[q - 1];
    out[q] = w[q] - 0.5 * second_diff + s.advect * (0.5 * w[q + 1] * w[q + 1] - 0.5 * w[q - 1] * w[q - 1]) -
             s.diffuse * second_diff;
  }
  return out;
}

namespace {

// Tridiagonal bands of the implicit map's Jacobian on the full grid.
void implicit_jacobian_bands(const BurgersConfig& config, const Vector& w, Vector& sub, Vector& diag, Vector& super) {
  const int d = config.grid_points();
  const Stencil s = stencil(config);
  sub = Vector::Zero(d);    // sub[q] multiplies w_{q-1} in row q
  super = Vector::Zero(d);  // super[q] multiplies w_{q+1} in row q
  diag = Vector::Ones(d);
  for (int q = 1; q < d - 1; ++q) {
    diag[q] = 2.0 + 2.0 * s.diffuse;
    sub[q] = -0.5 - s.advect * w[q - 1] - s.diffuse;
    super[q] = -0.5 + s.advect * w[q + 1] - s.diffuse;
  }
}

}  // namespace

Vector lf_implicit_jtprod(const BurgersConfig& config, const Vector& w, const Vector& v) {
  const int d = config.grid_points();
  if (w.size() != d || v.size() != d) throw DimensionError("lf_implicit_jtprod: wrong grid size", 0);
  Vector sub, diag, super;
  implicit_jacobian_bands(config, w, sub, diag, super);
  Vector out(d);
  for (int q = 0; q < d; ++q) {
    double acc = diag[q] * v[q];
    if (q + 1 < d) acc += sub[q + 1] * v[q + 1];    // J(q+1, q) from row q+1
    if (q - 1 >= 0) acc += super[q - 1] * v[q - 1];  // J(q-1, q) from row q-1
    out[q] = acc;
  }
  return out;
}

Eigen::SparseMatrix<double> lf_implicit_jacobian(const BurgersConfig& config, const Vector& w) {
  const int d = config.grid_points();
  if (w.size() != d) throw DimensionError("lf_implicit_jacobian: wrong grid size", 0);
  Vector sub, diag, super;
  implicit_jacobian_bands(config, w, sub, diag, super);
  Eigen::SparseMatrix<double> j(d, d);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(3 * d));
  for (int q = 0; q < d; ++q) {
    triplets.emplace_back(q, q, diag[q]);
    if (q >= 1 && sub[q] != 0.0) triplets.emplace_back(q, q - 1, sub[q]);
    if (q + 1 < d && super[q] != 0.0) triplets.emplace_back(q, q + 1, super[q]);
  }
  j.setFromTriplets(triplets.begin(), triplets.end());
  return j;
}

Vector sine_initial_profile(const BurgersConfig& config) {
  const int d = config.grid_points();
  Vector u(d);
  for (int q = 0; q < d; ++q) u[q] = std::sin(static_cast<double>(q) * config.dx());
  u[0] = 0.0;
  u[d - 1] = 0.0;
  return u;
}

Trajectory newton_implicit_rollout(const BurgersConfig& config, const Vector& u0) {
  config.validate();
  const int d = config.grid_points();
  if (u0.size() != d) throw DimensionError("newton_implicit_rollout: wrong grid size", 0);
  const int n = config.steps();
  constexpr double kTol = 1e-12;
  constexpr int kMaxNewton = 60;

  Trajectory u(n + 1, d);
  u[0] = u0;
  for (int i = 0; i < n; ++i) {
    Vector z = u[i];  // warm start at the previous state
    Vector residual = lf_implicit_map(config, z) - u[i];
    double best = residual.cwiseAbs().maxCoeff();
    int iter = 0;
    while (best > kTol) {
      if (++iter > kMaxNewton) {
        throw SolveError("newton_implicit_rollout: stagnation at step " + std::to_string(i + 1));
      }
      Vector sub, diag, super;
      implicit_jacobian_bands(config, z, sub, diag, super);
      const Vector delta = solve_tridiagonal(sub, diag, super, -residual);
      double t = 1.0;
      bool moved = false;
      while (t >= 1.0 / 1024.0) {
        const Vector z_trial = z + t * delta;
        const Vector r_trial = lf_implicit_map(config, z_trial) - u[i];
        const double m_trial = r_trial.allFinite() ? r_trial.cwiseAbs().maxCoeff()
                                                   : std::numeric_limits<double>::infinity();
        if (m_trial < best) {
          z = z_trial;
          residual = r_trial;
          best = m_trial;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) {
        throw SolveError("newton_implicit_rollout: stagnation at step " + std::to_string(i + 1));
      }
    }
    u[i + 1] = z;
  }
  return u;
}

Trajectory explicit_rollout(const BurgersConfig& config, const Vector& u0) {
  config.validate();
  const int n = config.steps();
  Trajectory u(n + 1, config.grid_points());
  u[0] = u0;
  for (int i = 0; i < n; ++i) {
    u[i + 1] = lf_explicit_step(config, u[i]);
    if (!u[i + 1].allFinite()) {
      throw NonFiniteError("explicit_rollout: non-finite state at step " + std::to_string(i + 1), i + 1);
    }
  }
  return u;
}

Vector strip_pins(const Vector& full) { return full.segment(1, full.size() - 2); }

Vector pad_pins(const Vector& interior) {
  Vector full = Vector::Zero(interior.size() + 2);
  full.segment(1, interior.size()) = interior;
  return full;
}

Trajectory pad_pins(const Trajectory& interior) {
  Trajectory full(interior.count(), interior.dimension() + 2);
  for (int i = 0; i < interior.count(); ++i) full[i] = pad_pins(interior[i]);
  return full;
}

DynamicsProblem make_implicit_problem(const BurgersConfig& config, const Vector& u0_full) {
  config.validate();
  if (u0_full.size() != config.grid_points()) {
    throw DimensionError("make_implicit_problem: wrong grid size", 0);
  }
  const int n = config.steps();
  const int d_int = config.interior_points();

  std::vector<ObjectiveTerm> terms;
  terms.reserve(static_cast<std::size_t>(n) + 1);
  terms.push_back(ObjectiveTerm::squared_distance(strip_pins(u0_full)));
  for (int i = 1; i <= n; ++i) terms.push_back(ObjectiveTerm::zero());

  // Interior view of the implicit map: boundary values are pinned constants,
  // so the interior Jacobian is the interior block of the full one.
  DynamicsMap map;
  map.value = [config](const Vector& w) { return strip_pins(lf_implicit_map(config, pad_pins(w))); };
  map.jtprod = [config](const Vector& w, const Vector& v) {
    return strip_pins(lf_implicit_jtprod(config, pad_pins(w), pad_pins(v)));
  };
  map.sparse_jacobian = [config, d_int](const Vector& w) {
    const Eigen::SparseMatrix<double> full = lf_implicit_jacobian(config, pad_pins(w));
    return Eigen::SparseMatrix<double>(full.block(1, 1, d_int, d_int));
  };

  return DynamicsProblem::implicit_backward(n, d_int, std::move(terms), std::move(map));
}

AdmmParams default_implicit_params(const BurgersConfig& config) {
  AdmmParams params = AdmmParams::uniform(config.steps(), 0.1, 2.0);
  params.subsolver.kind = SubsolverKind::LevenbergMarquardt;
  return params;
}

double l2_distance(const BurgersConfig& config, const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw DimensionError("l2_distance: sizes differ", 0);
  return std::sqrt(config.dx() * (u - v).squaredNorm());
}

}  // namespace padmm::burgers
