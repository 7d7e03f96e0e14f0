#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace padmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class of all exceptions thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A container or callback result does not conform to the problem dimensions.
/// Carries the index of the offending block.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, int block_index)
      : Error(what), block_index_(block_index) {}
  int block_index() const noexcept { return block_index_; }

 private:
  int block_index_;
};

/// Invalid solver or problem parameter (nonpositive penalty, bad tolerance, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Invalid or incomplete run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure while running a solver (subproblem failure, unsupported shape, ...).
class SolveError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value appeared while advancing the dynamics.
class NonFiniteError : public SolveError {
 public:
  NonFiniteError(const std::string& what, int step_index)
      : SolveError(what), step_index_(step_index) {}
  int step_index() const noexcept { return step_index_; }

 private:
  int step_index_;
};

/// Ordered sequence of equally sized real vectors.
///
/// Used for the primal trajectory x = (x_0, ..., x_n), the dual variables
/// lambda = (lambda_0, ..., lambda_{n-1}) and control sequences. Plain value
/// data, freely copyable and transferable between threads.
class BlockVector {
 public:
  BlockVector() = default;

  /// `count` zero blocks of dimension `dim`.
  BlockVector(int count, int dim) {
    if (count < 0 || dim < 1) {
      throw DimensionError("BlockVector: count must be >= 0 and dim >= 1", 0);
    }
    blocks_.assign(static_cast<std::size_t>(count), Vector::Zero(dim));
  }

  static BlockVector zeros(int count, int dim) { return BlockVector(count, dim); }

  int count() const noexcept { return static_cast<int>(blocks_.size()); }
  int dimension() const noexcept { return blocks_.empty() ? 0 : static_cast<int>(blocks_.front().size()); }
  bool empty() const noexcept { return blocks_.empty(); }

  Vector& operator[](int i) { return blocks_[static_cast<std::size_t>(i)]; }
  const Vector& operator[](int i) const { return blocks_[static_cast<std::size_t>(i)]; }

  void push_back(Vector v) { blocks_.push_back(std::move(v)); }

  bool same_shape(const BlockVector& other) const {
    if (count() != other.count()) return false;
    for (int i = 0; i < count(); ++i) {
      if (blocks_[static_cast<std::size_t>(i)].size() != other[i].size()) return false;
    }
    return true;
  }

  /// max_i ||block_i||_inf; zero for an empty sequence.
  double inf_norm() const {
    double m = 0.0;
    for (const Vector& b : blocks_) {
      if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
    }
    return m;
  }

  /// max_i ||block_i - other_i||_inf.
  double inf_norm_diff(const BlockVector& other) const {
    double m = 0.0;
    for (int i = 0; i < count(); ++i) {
      const Vector d = (*this)[i] - other[i];
      if (d.size() > 0) m = std::max(m, d.cwiseAbs().maxCoeff());
    }
    return m;
  }

  /// Per-block squared Euclidean distances to `other`.
  Eigen::ArrayXd blockwise_sq_diff(const BlockVector& other) const {
    Eigen::ArrayXd out(count());
    for (int i = 0; i < count(); ++i) out[i] = ((*this)[i] - other[i]).squaredNorm();
    return out;
  }

  bool all_finite() const {
    for (const Vector& b : blocks_) {
      if (!b.allFinite()) return false;
    }
    return true;
  }

  friend bool operator==(const BlockVector& a, const BlockVector& b) {
    if (a.count() != b.count()) return false;
    for (int i = 0; i < a.count(); ++i) {
      if (a[i].size() != b[i].size() || a[i] != b[i]) return false;
    }
    return true;
  }

 private:
  std::vector<Vector> blocks_;
};

/// Primal block vector x = (x_0, ..., x_n): n+1 blocks of dimension d.
using Trajectory = BlockVector;
/// Multipliers lambda = (lambda_0, ..., lambda_{n-1}): n blocks of dimension d.
using DualVariables = BlockVector;
/// Control blocks u = (u_0, ..., u_n) for the controlled problem shape.
using ControlSequence = BlockVector;

}  // namespace padmm
