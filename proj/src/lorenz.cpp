#include "padmm/lorenz.hpp"

#include <cmath>

namespace padmm::lorenz {

int LorenzConfig::steps() const { return static_cast<int>(std::llround(horizon / dt)); }

void LorenzConfig::validate() const {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw ConfigError("lorenz: dt and horizon must be positive");
  const int n = steps();
  if (std::abs(n * dt - horizon) > 1e-12 * (1.0 + horizon)) {
    throw ConfigError("lorenz: horizon must be an integer multiple of dt");
  }
  if (observe_every < 1 || n % observe_every != 0) {
    throw ConfigError("lorenz: the observation stride must divide the step count");
  }
  if (truth_start.size() != 3) throw ConfigError("lorenz: the state is three-dimensional");
  if (background_weight < 0.0) throw ConfigError("lorenz: background weight must be nonnegative");
}

Vector vector_field(const LorenzConfig& config, const Vector& v) {
  Vector out(3);
  out[0] = config.sigma * (v[1] - v[0]);
  out[1] = v[0] * (config.rho_l - v[2]) - v[1];
  out[2] = v[0] * v[1] - config.beta * v[2];
  return out;
}

Matrix field_jacobian(const LorenzConfig& config, const Vector& v) {
  Matrix j(3, 3);
  j << -config.sigma, config.sigma, 0.0,
      config.rho_l - v[2], -1.0, -v[0],
      v[1], v[0], -config.beta;
  return j;
}

Vector rk4_step(const std::function<Vector(const Vector&)>& field, const Vector& v, double dt) {
  const Vector k1 = field(v);
  const Vector k2 = field(v + 0.5 * dt * k1);
  const Vector k3 = field(v + 0.5 * dt * k2);
  const Vector k4 = field(v + dt * k3);
  return v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

DynamicsMap rk4_dynamics_map(std::function<Vector(const Vector&)> field,
                             std::function<Matrix(const Vector&)> jacobian, double dt) {
  DynamicsMap map;
  map.value = [field, dt](const Vector& v) { return rk4_step(field, v, dt); };
  // Stage derivatives: dk1 = J(v), dk_s = J(v + c dt k_{s-1}) (I + c dt dk_{s-1}).
  const auto full_jacobian = [field, jacobian, dt](const Vector& v) {
    const int d = static_cast<int>(v.size());
    const Matrix id = Matrix::Identity(d, d);
    const Vector k1 = field(v);
    const Matrix dk1 = jacobian(v);
    const Vector v2 = v + 0.5 * dt * k1;
    const Vector k2 = field(v2);
    const Matrix dk2 = jacobian(v2) * (id + 0.5 * dt * dk1);
    const Vector v3 = v + 0.5 * dt * k2;
    const Vector k3 = field(v3);
    const Matrix dk3 = jacobian(v3) * (id + 0.5 * dt * dk2);
    const Vector v4 = v + dt * k3;
    const Matrix dk4 = jacobian(v4) * (id + dt * dk3);
    return (id + (dt / 6.0) * (dk1 + 2.0 * dk2 + 2.0 * dk3 + dk4)).eval();
  };
  map.jacobian = full_jacobian;
  map.jtprod = [full_jacobian](const Vector& v, const Vector& w) {
    return (full_jacobian(v).transpose() * w).eval();
  };
  return map;
}

std::pair<DynamicsProblem, FourDVarData> make_4dvar_problem(const LorenzConfig& config, std::uint64_t seed,
                                                            double noise_scale) {
  config.validate();
  const int n = config.steps();
  const int stride = config.observe_every;
  const int observation_count = n / stride + 1;

  DynamicsMap map = rk4_dynamics_map([config](const Vector& v) { return vector_field(config, v); },
                                     [config](const Vector& v) { return field_jacobian(config, v); }, config.dt);

  FourDVarData data;
  data.truth = Trajectory(n + 1, 3);
  data.truth[0] = config.truth_start;
  for (int j = 0; j < n; ++j) data.truth[j + 1] = map.value(data.truth[j]);

  Rng rng(seed);
  data.observations.reserve(static_cast<std::size_t>(observation_count));
  for (int j = 0; j < observation_count; ++j) {
    data.observations.push_back(data.truth[j * stride] + noise_scale * rng.gaussian_vector(3));
  }
  data.background = data.observations.front();

  std::vector<ObjectiveTerm> terms;
  terms.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    if (i == 0) {
      const Vector obs = data.observations.front();
      const Vector bg = data.background;
      const double alpha = config.background_weight;
      const double sa = std::sqrt(alpha);
      ObjectiveTerm t;
      t.value = [obs, bg, alpha](const Vector& v) {
        return 0.5 * (v - obs).squaredNorm() + 0.5 * alpha * (v - bg).squaredNorm();
      };
      t.gradient = [obs, bg, alpha](const Vector& v) { return ((v - obs) + alpha * (v - bg)).eval(); };
      t.residual = [obs, bg, sa](const Vector& v) {
        Vector r(6);
        r.head(3) = v - obs;
        r.tail(3) = sa * (v - bg);
        return r;
      };
      t.residual_jacobian = [sa](const Vector&) {
        Matrix j(6, 3);
        j.topRows(3) = Matrix::Identity(3, 3);
        j.bottomRows(3) = sa * Matrix::Identity(3, 3);
        return j;
      };
      terms.push_back(std::move(t));
    } else if (i % stride == 0) {
      terms.push_back(ObjectiveTerm::squared_distance(data.observations[static_cast<std::size_t>(i / stride)]));
    } else {
      terms.push_back(ObjectiveTerm::zero());
    }
  }

  return {DynamicsProblem::explicit_forward(n, 3, std::move(terms), std::move(map)), std::move(data)};
}

std::pair<Trajectory, DualVariables> admm_init_4dvar(const DynamicsProblem& problem, const FourDVarData& data) {
  const int n = problem.transition_count();
  const int observation_count = static_cast<int>(data.observations.size());
  if (observation_count < 2 || n % (observation_count - 1) != 0) {
    throw ConfigError("admm_init_4dvar: observation count does not match the problem");
  }
  const int stride = n / (observation_count - 1);

  Trajectory x(n + 1, problem.dimension());
  for (int j = 0; j < observation_count; ++j) x[j * stride] = data.observations[static_cast<std::size_t>(j)];
  for (int j = 0; j + 1 < observation_count; ++j) {
    for (int i = j * stride; i + 1 < (j + 1) * stride; ++i) {
      x[i + 1] = problem.dynamics().value(x[i]);
    }
  }
  return {std::move(x), DualVariables(n, problem.dimension())};
}

AdmmParams default_4dvar_params(const DynamicsProblem& problem) {
  AdmmParams params = AdmmParams::uniform(problem.transition_count(), 0.3, 10.0);
  params.subsolver.kind = SubsolverKind::LevenbergMarquardt;
  return params;
}

double trajectory_rmse(const Trajectory& a, const Trajectory& b) {
  if (!a.same_shape(b)) throw DimensionError("trajectory_rmse: shapes differ", 0);
  double sum = 0.0;
  long count = 0;
  for (int i = 0; i < a.count(); ++i) {
    sum += (a[i] - b[i]).squaredNorm();
    count += a[i].size();
  }
  return std::sqrt(sum / static_cast<double>(count));
}

}  // namespace padmm::lorenz
