#include "padmm/tuner.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace padmm {

namespace {

constexpr double kInflation = 1.1;

double spectral_norm(const Matrix& m) {
  const Matrix gram = m.transpose() * m;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  return top > 0.0 ? std::sqrt(top) : 0.0;
}

}  // namespace

BlockBox box_around(const Trajectory& x, double spread_multiplier) {
  if (x.count() == 0) throw ParameterError("box_around: empty trajectory");
  const int d = x.dimension();
  Vector lo = x[0], hi = x[0];
  for (int i = 1; i < x.count(); ++i) {
    lo = lo.cwiseMin(x[i]);
    hi = hi.cwiseMax(x[i]);
  }
  const Vector spread = (hi - lo).cwiseMax(0.1);
  BlockBox box;
  box.lower.reserve(static_cast<std::size_t>(x.count()));
  box.upper.reserve(static_cast<std::size_t>(x.count()));
  for (int i = 0; i < x.count(); ++i) {
    box.lower.push_back(x[i] - spread_multiplier * spread);
    box.upper.push_back(x[i] + spread_multiplier * spread);
  }
  (void)d;
  return box;
}

SmoothnessConstants estimate_constants(const DynamicsProblem& problem, const BlockBox& box, int samples,
                                       std::uint64_t seed) {
  if (box.blocks() != problem.block_count()) {
    throw DimensionError("estimate_constants: box must have n+1 blocks", box.blocks());
  }
  if (samples < 100) throw ParameterError("estimate_constants: need at least 100 samples");
  const int n = problem.transition_count();
  const int d = problem.dimension();
  Rng rng(seed);

  SmoothnessConstants out;
  out.block_diameters = Eigen::ArrayXd(n + 1);
  for (int i = 0; i <= n; ++i) out.block_diameters[i] = (box.upper[i] - box.lower[i]).norm();
  out.rho_reference = Eigen::ArrayXd::Ones(n);

  // Objective terms: gradient maxima and pairwise difference quotients, with
  // coordinate-aligned pairs mixed in so axis-dominant curvature is seen.
  for (int i = 0; i <= n; ++i) {
    const auto& term = problem.term(i);
    for (int s = 0; s < samples; ++s) {
      const Vector x = rng.uniform_vector(box.lower[i], box.upper[i]);
      const Vector gx = term.gradient(x);
      if (!gx.allFinite()) throw SolveError("estimate_constants: non-finite objective gradient in the box");
      out.grad_f_max = std::max(out.grad_f_max, gx.norm());

      Vector y;
      if (s % 2 == 0) {
        y = rng.uniform_vector(box.lower[i], box.upper[i]);
      } else {
        y = x;
        const int k = s % d;
        y[k] = rng.uniform(box.lower[i][k], box.upper[i][k]);
      }
      const double dist = (x - y).norm();
      if (dist > 1e-12) {
        out.grad_f_lipschitz = std::max(out.grad_f_lipschitz, (gx - term.gradient(y)).norm() / dist);
      }
    }
  }

  // Dynamics maps, sampled over the blocks they act on.
  const int map_count = problem.shape() == ConstraintShape::SemiImplicit ? n : 1;
  for (int m = 0; m < map_count; ++m) {
    const DynamicsMap& map = problem.step_map(m);
    for (int s = 0; s < samples; ++s) {
      const int block = map_count == 1 ? s % (n + 1) : m;
      const Vector x = rng.uniform_vector(box.lower[block], box.upper[block]);
      const Vector fx = map.value(x);
      if (!fx.allFinite()) throw SolveError("estimate_constants: non-finite dynamics value in the box");
      out.phi_max = std::max(out.phi_max, fx.norm());
      const Matrix jx = map.dense_jacobian(x);
      out.phi_jacobian_max = std::max(out.phi_jacobian_max, spectral_norm(jx));

      Vector y;
      if (s % 2 == 0) {
        y = rng.uniform_vector(box.lower[block], box.upper[block]);
      } else {
        y = x;
        const int k = s % d;
        y[k] = rng.uniform(box.lower[block][k], box.upper[block][k]);
      }
      const double dist = (x - y).norm();
      if (dist > 1e-12) {
        out.phi_jacobian_lipschitz =
            std::max(out.phi_jacobian_lipschitz, spectral_norm(jx - map.dense_jacobian(y)) / dist);
      }
    }
  }

  out.grad_f_max *= kInflation;
  out.grad_f_lipschitz *= kInflation;
  out.phi_max *= kInflation;
  out.phi_jacobian_max *= kInflation;
  out.phi_jacobian_lipschitz *= kInflation;
  return out;
}

double initialization_residual_bound(const DynamicsProblem& problem, const Trajectory& x0) {
  double bound = 0.0;
  for (const Vector& r : constraint_residuals(problem, x0)) bound = std::max(bound, r.squaredNorm());
  return bound;
}

namespace {

// Shared formula kernels over powers P[p] = M_phi^p and geometric sums G[m].
struct Kernels {
  Eigen::ArrayXd powers;     // P[0..n]
  Eigen::ArrayXd geometric;  // G[0..n]
  double m_f, l_f, l_phi;

  Kernels(const SmoothnessConstants& c, int n)
      : powers(n + 1), geometric(n + 1), m_f(c.grad_f_max), l_f(c.grad_f_lipschitz), l_phi(c.phi_jacobian_lipschitz) {
    powers[0] = 1.0;
    for (int p = 1; p <= n; ++p) powers[p] = powers[p - 1] * c.phi_jacobian_max;
    geometric[0] = 0.0;
    for (int m = 1; m <= n; ++m) geometric[m] = geometric[m - 1] + powers[m - 1];
  }

  double dual_bound(int n, int j, int i, const Eigen::ArrayXd& rho, const Eigen::ArrayXd& eta) const {
    (void)n;
    if (j == i) return 1.0 / eta[i + 1];
    return rho[j] * powers[j - i] + powers[j - i] / eta[j + 1];
  }

  double dual_diff(int n, int j, int i, const Eigen::ArrayXd& rho, const Eigen::ArrayXd& eta) const {
    if (j == i) return geometric[n - i - 1] * m_f * l_phi + l_f + 1.0 / eta[i + 1];
    const double p = powers[j - i];
    return p * geometric[n - j - 1] * m_f * l_phi + p * l_f + (2.0 * (j - i) + 1.0) * p / eta[j + 1] +
           (2.0 * (j - i) - 1.0) * rho[j] * p;
  }

  double dual_diff_prev(int n, int j, int i, const Eigen::ArrayXd& rho, const Eigen::ArrayXd& eta) const {
    (void)n;
    if (j == i) return 1.0 / eta[j + 1];
    return powers[j - i] / eta[j + 1] + rho[j] * powers[j - i];
  }
};

}  // namespace

ConstantsTable constants_table(const SmoothnessConstants& consts, const PenaltyVector& rho,
                               const Eigen::ArrayXd& eta) {
  rho.validate();
  validate_proximal_weights(eta);
  const int n = rho.size();
  if (eta.size() != n + 1) throw DimensionError("constants_table: eta must have n+1 entries", static_cast<int>(eta.size()));

  const Kernels kernel(consts, n);
  ConstantsTable table;
  table.n = n;
  table.geometric = kernel.geometric;
  table.dual_bound = Matrix::Zero(n, n);
  table.dual_diff = Matrix::Zero(n, n);
  table.dual_diff_prev = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      table.dual_bound(j, i) = kernel.dual_bound(n, j, i, rho.values, eta);
      table.dual_diff(j, i) = kernel.dual_diff(n, j, i, rho.values, eta);
      table.dual_diff_prev(j, i) = kernel.dual_diff_prev(n, j, i, rho.values, eta);
    }
  }
  table.c = Eigen::ArrayXd(n + 1);
  table.c_tilde = Eigen::ArrayXd(n + 1);
  for (int i = 0; i <= n; ++i) {
    double sum_c = 0.0, sum_ct = 0.0;
    for (int j = 0; j < i; ++j) {
      const double coeff = 2.0 * (n - j) / rho[j];
      sum_c += coeff * table.dual_diff(i - 1, j) * table.dual_diff(i - 1, j);
      sum_ct += coeff * table.dual_diff_prev(i - 1, j) * table.dual_diff_prev(i - 1, j);
    }
    table.c[i] = 1.0 / (4.0 * eta[i]) - sum_c;
    table.c_tilde[i] = 1.0 / (4.0 * eta[i]) - sum_ct;
  }
  return table;
}

ConditionReport check_condition(const ConstantsTable& table, const PenaltyVector& rho, const Eigen::ArrayXd& eta) {
  const int n = table.n;
  if (rho.size() != n || eta.size() != n + 1) {
    throw DimensionError("check_condition: rho/eta do not match the table", n);
  }
  ConditionReport report;
  report.pass = true;
  for (int i = 1; i <= n; ++i) {
    ConditionRow row;
    row.block = i;
    row.budget = 1.0 / (4.0 * eta[i]);
    for (int j = 0; j < i; ++j) {
      row.row_sum += (2.0 * (n - j) / rho[j]) * table.dual_diff(i - 1, j) * table.dual_diff(i - 1, j);
    }
    row.pass = row.row_sum < row.budget;
    report.pass = report.pass && row.pass;
    report.rows.push_back(row);
  }
  return report;
}

PenaltyCertificate choose_penalties(const SmoothnessConstants& consts, const Eigen::ArrayXd& eta, double margin) {
  validate_proximal_weights(eta);
  if (!(margin > 0.0) || !(margin < 1.0)) throw ParameterError("choose_penalties: margin must be in (0, 1)");
  const int n = static_cast<int>(eta.size()) - 1;
  if (n < 1) throw ParameterError("choose_penalties: need at least one constraint");
  if (consts.rho_reference.size() != n) {
    throw ParameterError("choose_penalties: rho_reference must have n entries");
  }

  const Kernels kernel(consts, n);
  Eigen::ArrayXd rho = Eigen::ArrayXd::Zero(n);
  constexpr double kStrict = 1.0 + 1e-6;

  // Rows are processed bottom-up (r = n-1 .. 0). The diagonal entry of row r
  // is independent of rho_r, so rho_r can be fixed first; the off-diagonal
  // entries then become fixed and the earlier penalties are only ever raised.
  for (int r = n - 1; r >= 0; --r) {
    // Level-set floors: rho_r > 2 rho_r^0 and the squared dual bound (built
    // from penalties that are already final).
    double lambda_bound = kernel.geometric[n - r] * consts.grad_f_max;
    for (int j = r; j <= n - 1; ++j) {
      lambda_bound += kernel.dual_bound(n, j, r, rho, eta) * consts.block_diameters[j + 1];
    }
    rho[r] = std::max({rho[r], kStrict * 2.0 * consts.rho_reference[r], kStrict * lambda_bound * lambda_bound});

    // Per-entry budget: margin * (1/(4 eta_{r+1})) / (row length).
    const double budget = margin / (4.0 * eta[r + 1] * static_cast<double>(r + 1));
    const double diag = kernel.dual_diff(n, r, r, rho, eta);
    rho[r] = std::max(rho[r], 2.0 * (n - r) * diag * diag / budget);
    if (!std::isfinite(rho[r])) {
      throw ParameterError("choose_penalties: row " + std::to_string(r) + " produced a non-finite penalty");
    }
    for (int j = 0; j < r; ++j) {
      const double entry = kernel.dual_diff(n, r, j, rho, eta);
      rho[j] = std::max(rho[j], 2.0 * (n - j) * entry * entry / budget);
      if (!std::isfinite(rho[j])) {
        throw ParameterError("choose_penalties: row " + std::to_string(r) + " produced a non-finite penalty");
      }
    }
  }

  PenaltyCertificate certificate;
  certificate.rho = PenaltyVector(rho);
  const ConstantsTable table = constants_table(consts, certificate.rho, eta);
  certificate.condition = check_condition(table, certificate.rho, eta);
  certificate.c = table.c;
  certificate.c_tilde = table.c_tilde;
  certificate.certified = certificate.condition.pass && (table.c > 0.0).all() && (table.c_tilde > 0.0).all();
  return certificate;
}

Eigen::ArrayXd dual_bound_diagnostic(const ConstantsTable& table, const SmoothnessConstants& consts,
                                     const Eigen::ArrayXd& step_norms) {
  const int n = table.n;
  if (step_norms.size() != n + 1) {
    throw DimensionError("dual_bound_diagnostic: need n+1 per-block step norms", static_cast<int>(step_norms.size()));
  }
  Eigen::ArrayXd bound(n);
  for (int i = 0; i < n; ++i) {
    bound[i] = table.geometric[n - i] * consts.grad_f_max;
    for (int j = i; j <= n - 1; ++j) bound[i] += table.dual_bound(j, i) * step_norms[j + 1];
  }
  return bound;
}

std::string certificate_to_json(const PenaltyCertificate& certificate) {
  std::ostringstream out;
  out.precision(17);
  out << "{\"certified\": " << (certificate.certified ? "true" : "false") << ", \"rho\": [";
  for (int j = 0; j < certificate.rho.size(); ++j) out << (j ? ", " : "") << certificate.rho[j];
  out << "], \"c\": [";
  for (int i = 0; i < certificate.c.size(); ++i) out << (i ? ", " : "") << certificate.c[i];
  out << "], \"c_tilde\": [";
  for (int i = 0; i < certificate.c_tilde.size(); ++i) out << (i ? ", " : "") << certificate.c_tilde[i];
  out << "], \"rows\": [";
  for (std::size_t r = 0; r < certificate.condition.rows.size(); ++r) {
    const ConditionRow& row = certificate.condition.rows[r];
    out << (r ? ", " : "") << "{\"block\": " << row.block << ", \"row_sum\": " << row.row_sum
        << ", \"budget\": " << row.budget << ", \"pass\": " << (row.pass ? "true" : "false") << "}";
  }
  out << "]}";
  return out.str();
}

}  // namespace padmm
