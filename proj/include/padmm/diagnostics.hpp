#pragma once

#include "padmm/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace padmm {

/// Per-iteration diagnostics emitted by the solver. `iteration` starts at 1;
/// step norms compare iterate k against k-1.
struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double constraint_inf = 0.0;  ///< max_j ||r_j||_inf
  double constraint_sq = 0.0;   ///< sum_j ||r_j||^2
  double auglag = 0.0;
  double lyapunov = 0.0;
  double primal_step_inf = 0.0;
  Eigen::ArrayXd primal_step_blocks_sq;  ///< per-block ||x_i^k - x_i^{k-1}||^2
  double dual_step_inf = 0.0;
  double kkt_stationarity = 0.0;
  double wall_ms = 0.0;
};

/// Writes `iter,objective,constraint_inf,constraint_sq,auglag,lyapunov,`
/// `primal_step,dual_step,kkt_stat,wall_ms` rows at 17 significant digits with
/// LF line endings. `zero_wall_times` replaces the timing column with zeros so
/// repeated runs byte-compare equal.
void write_csv(const std::vector<IterationRecord>& records, const std::filesystem::path& path,
               bool zero_wall_times = false);

/// Parses a file produced by write_csv. Blockwise step norms are not part of
/// the format and come back empty.
std::vector<IterationRecord> read_csv(const std::filesystem::path& path);

/// Convergence-rate diagnostic: s_k = sum_i (c_i + c~_i) ||x_i^k - x_i^{k-1}||^2,
/// its running minimum m_k, and the k * m_k series whose trend certifies the
/// o(1/k) behaviour of the fastest convergent subsequence.
struct RateReport {
  std::vector<double> weighted_step_sq;  ///< s_k per record
  std::vector<double> running_min;       ///< m_k
  std::vector<double> k_times_min;       ///< k * m_k
  double trend_slope = 0.0;              ///< least-squares slope of k * m_k over k
};

RateReport rate_report(const std::vector<IterationRecord>& records, const Eigen::ArrayXd& c,
                       const Eigen::ArrayXd& c_tilde);

/// Flat key = value configuration text; '#' starts a comment.
class Config {
 public:
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  /// Canonical `key = value` text, keys sorted.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Everything needed to reproduce a run: the configuration snapshot, the seed,
/// the parameter certificate when one was computed, the source revision and
/// timestamps. Timestamps are zeroed unless wall-clock recording is on, so a
/// rerun with the same inputs produces identical bytes.
struct RunManifest {
  std::string config_text;
  std::uint64_t seed = 0;
  std::string certificate_json;  ///< empty when no certificate was produced
  std::string source_revision;
  std::string started_at;
  std::string finished_at;
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

/// Two-panel SVG 1.1 line chart of objective and constraint error against the
/// iteration count (log10 scale on the constraint panel).
void write_svg_convergence(const std::vector<IterationRecord>& records, const std::filesystem::path& path);

/// Entry point behind the command-line tool; returns the process exit code
/// (0 success, 1 solver failure, 2 configuration/usage error).
int cli_main(int argc, const char* const* argv);

}  // namespace padmm
