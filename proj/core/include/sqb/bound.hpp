#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sqb/model.hpp"

namespace sqb {

/// Curvature in factored form, Sigma = sum_k weights[k] * columns[k] columns[k]'.
/// Also carries the per-example (z, r) pairs that produced it.
struct BoundFactors {
  std::size_t dim = 0;
  std::vector<SparseVector> columns;
  std::vector<double> weights;
  std::vector<double> z_values;
  std::vector<SparseVector> r_values;

  std::size_t rank() const { return columns.size(); }
  /// Dense reconstruction of Sigma. For tests and small d only.
  Matrix to_dense() const;
  /// The columns as a dense d x k matrix.
  Matrix column_matrix() const;
};

/// Output of the quadratic bound on a single example: for every theta,
///   Z_j(theta) <= z exp(0.5 (theta - t)' S (theta - t) + (theta - t)' r)
/// where t is the expansion point and S = factors.to_dense().
struct SingleBound {
  double z = 0.0;
  double log_z = 0.0;
  SparseVector r;
  std::vector<SparseVector> columns;
  std::vector<double> weights;

  Matrix curvature_dense(std::size_t dim) const;
};

/// Averaged bound over a batch: mu = (1/|B|) sum (r_j - f_j(y_j)) and
/// Sigma = (1/|B|) sum S_j (weights already divided by |B|).
struct BatchBound {
  Vector mu;
  BoundFactors curvature;
  std::size_t batch_size = 0;
};

enum class BoundParts {
  kGradientOnly,  // mu only; curvature left empty
  kFull,
};

/// tanh(0.5 log(alpha/z)) / (2 log(alpha/z)). Returns 0 for z == 0 and the
/// series value 1/4 (1 - t^2/12) for |t| < 1e-8, t = log(alpha/z).
double weight_function(double alpha, double z);

/// Same weight in terms of t = log(alpha/z); t = +inf means z == 0.
double weight_from_log_ratio(double t);

/// Bound computation for one example, processing outcomes in ascending index
/// order. Zero-measure outcomes are skipped. Factors with zero weight are not
/// emitted.
SingleBound bound_single(const LogLinearModel& model, std::size_t j, const Vector& theta_tilde);

BatchBound bound_batch(const LogLinearModel& model, std::span<const std::size_t> batch,
                       const Vector& theta_tilde, BoundParts parts = BoundParts::kFull);

}  // namespace sqb
