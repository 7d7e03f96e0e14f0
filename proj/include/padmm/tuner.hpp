#pragma once

#include "padmm/lagrangian.hpp"
#include "padmm/problem.hpp"
#include "padmm/random.hpp"

#include <Eigen/Core>

#include <string>
#include <vector>

namespace padmm {

/// Sampled bounds of the problem data over a working box: the largest
/// objective gradient and its Lipschitz constant, the largest dynamics value,
/// Jacobian norm and Jacobian Lipschitz constant, plus per-block box
/// diameters, the reference penalties of the level-set assumption and the
/// squared residual bound of the initialization.
struct SmoothnessConstants {
  double grad_f_max = 0.0;            // M_f
  double grad_f_lipschitz = 0.0;      // L_f
  double phi_max = 0.0;               // C_phi
  double phi_jacobian_max = 0.0;      // M_phi
  double phi_jacobian_lipschitz = 0.0;  // L_phi
  Eigen::ArrayXd block_diameters;     // D_i, n+1 entries
  Eigen::ArrayXd rho_reference;       // rho_i^0, n entries
  double init_residual_sq_max = 0.0;  // max_j ||r_j(x^0)||^2
};

/// Per-block sampling box.
struct BlockBox {
  std::vector<Vector> lower;
  std::vector<Vector> upper;

  int blocks() const noexcept { return static_cast<int>(lower.size()); }
};

/// Box centred on a trajectory, extended by `spread_multiplier` times the
/// componentwise spread of the trajectory (floored at 0.1 per component).
BlockBox box_around(const Trajectory& x, double spread_multiplier = 3.0);

/// Samples the callbacks over the box (at least 100 samples) and returns the
/// constants with 10% safety inflation. Lipschitz constants come from pairwise
/// difference quotients over random and coordinate-aligned pairs.
SmoothnessConstants estimate_constants(const DynamicsProblem& problem, const BlockBox& box, int samples,
                                       std::uint64_t seed = 0);

/// max_j ||r_j(x0)||^2 of a candidate initialization; feasible starts give 0.
double initialization_residual_bound(const DynamicsProblem& problem, const Trajectory& x0);

/// The constants tables of the descent analysis. Entries (j, i) are populated
/// for 0 <= i <= j <= n-1. Every geometric expression (1 - M_phi^m)/(1 -
/// M_phi) is evaluated as the finite sum G_m = sum_{t<m} M_phi^t, which is
/// also exact at M_phi = 1.
struct ConstantsTable {
  int n = 0;
  Matrix dual_bound;        // B[j][i]
  Matrix dual_diff;         // C[j][i]
  Matrix dual_diff_prev;    // C~[j][i]
  Eigen::ArrayXd c;         // descent coefficients c_i, n+1 entries
  Eigen::ArrayXd c_tilde;   // c~_i
  Eigen::ArrayXd geometric; // G_m for m = 0..n
};

ConstantsTable constants_table(const SmoothnessConstants& consts, const PenaltyVector& rho,
                               const Eigen::ArrayXd& eta);

/// One row of the descent condition: block i requires
/// sum_{j<i} (2(n-j)/rho_j) C[i-1][j]^2 < 1/(4 eta_i).
struct ConditionRow {
  int block = 0;
  double row_sum = 0.0;
  double budget = 0.0;
  bool pass = false;
};

struct ConditionReport {
  std::vector<ConditionRow> rows;
  bool pass = false;
};

ConditionReport check_condition(const ConstantsTable& table, const PenaltyVector& rho, const Eigen::ArrayXd& eta);

/// Result of the successive penalty selection: the penalties, the condition
/// report at those penalties, and the descent coefficients. `certified` means
/// every row passed strictly and all coefficients are positive.
struct PenaltyCertificate {
  PenaltyVector rho;
  ConditionReport condition;
  Eigen::ArrayXd c;
  Eigen::ArrayXd c_tilde;
  bool certified = false;
};

/// Bottom-up successive selection with monotone ratcheting: processes
/// constraint rows from the last to the first, fixing each rho_r from its
/// diagonal entry (which does not depend on rho_r) and then raising the
/// earlier penalties until the row fits its budget. Each row's budget
/// 1/(4 eta_{i}) is split evenly across its entries and scaled by `margin`
/// in (0, 1) to leave strict slack. Also enforces the level-set floors
/// rho_i > 2 rho_i^0 and the squared dual-bound term built from the box
/// diameters.
PenaltyCertificate choose_penalties(const SmoothnessConstants& consts, const Eigen::ArrayXd& eta,
                                    double margin = 0.9);

/// Per-index a-priori bound on ||lambda_i|| given the latest per-block step
/// norms (Euclidean, n+1 entries): G_{n-i} M_f + sum_{j>=i} B[j][i] ||dx_{j+1}||.
Eigen::ArrayXd dual_bound_diagnostic(const ConstantsTable& table, const SmoothnessConstants& consts,
                                     const Eigen::ArrayXd& step_norms);

/// Certificate rendered as a JSON object (for run manifests).
std::string certificate_to_json(const PenaltyCertificate& certificate);

}  // namespace padmm
