#include "sqb/bound.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "sqb/errors.hpp"

namespace sqb {

namespace {

constexpr double kSeriesThreshold = 1e-8;

// log(exp(a) + exp(b)) for finite b, a possibly -inf.
double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

// 1 / (1 + exp(-t))
double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

Matrix weighted_outer_sum(std::size_t dim, const std::vector<SparseVector>& columns,
                          const std::vector<double>& weights) {
  const auto d = static_cast<Eigen::Index>(dim);
  Matrix out = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const Vector l = Vector(columns[k]);
    out.noalias() += weights[k] * l * l.transpose();
  }
  return out;
}

}  // namespace

Matrix BoundFactors::to_dense() const { return weighted_outer_sum(dim, columns, weights); }

Matrix BoundFactors::column_matrix() const {
  Matrix out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = Vector(columns[k]);
  }
  return out;
}

Matrix SingleBound::curvature_dense(std::size_t dim) const {
  return weighted_outer_sum(dim, columns, weights);
}

double weight_from_log_ratio(double t) {
  if (std::isnan(t)) throw InputError("weight_function: log ratio is NaN");
  if (std::isinf(t)) return 0.0;
  if (std::abs(t) < kSeriesThreshold) return 0.25 * (1.0 - t * t / 12.0);
  return std::tanh(0.5 * t) / (2.0 * t);
}

double weight_function(double alpha, double z) {
  if (!(alpha > 0.0)) throw InputError("weight_function: alpha must be > 0");
  if (!(z >= 0.0)) throw InputError("weight_function: z must be >= 0");
  if (z == 0.0) return 0.0;
  return weight_from_log_ratio(std::log(alpha) - std::log(z));
}

namespace {

SingleBound compute_bound(const LogLinearModel& model, std::size_t j, const Vector& theta_tilde,
                          bool with_factors) {
  const std::size_t d = model.dim();
  if (static_cast<std::size_t>(theta_tilde.size()) != d) {
    throw InputError("theta_tilde has dimension " + std::to_string(theta_tilde.size()) +
                     ", model expects " + std::to_string(d));
  }
  if (j >= model.num_examples()) throw InputError("example index out of range");

  const auto dim = static_cast<Eigen::Index>(d);
  SingleBound out;
  out.r = SparseVector(dim);
  double log_z = -std::numeric_limits<double>::infinity();

  const std::size_t n = model.outcome_count(j);
  for (std::size_t y = 0; y < n; ++y) {
    const double h = model.measure(j, y);
    if (h < 0.0 || std::isnan(h)) {
      throw InputError("negative measure at example " + std::to_string(j) + ", outcome " +
                       std::to_string(y));
    }
    if (h == 0.0) continue;
    const FeatureView f = model.feature(j, y);
    const double log_alpha = std::log(h) + f.dot(theta_tilde);
    const SparseVector fs = f.to_sparse(dim);

    if (std::isinf(log_z)) {
      // z -> 0+: the first outcome carries zero weight and r jumps to f.
      out.r = fs;
      log_z = log_alpha;
      continue;
    }

    const double t = log_alpha - log_z;
    const double w = weight_from_log_ratio(t);
    if (with_factors && w > 0.0) {
      SparseVector column = fs - out.r;
      column.prune(0.0);
      out.columns.push_back(std::move(column));
      out.weights.push_back(w);
    }
    // r <- (z/(z+alpha)) r + (alpha/(z+alpha)) f
    const double a = logistic(t);
    out.r = (1.0 - a) * out.r + a * fs;
    log_z = log_add(log_z, log_alpha);
  }

  if (std::isinf(log_z)) {
    throw InputError("example " + std::to_string(j) + " has all-zero measures");
  }
  out.log_z = log_z;
  out.z = std::exp(log_z);
  return out;
}

}  // namespace

SingleBound bound_single(const LogLinearModel& model, std::size_t j, const Vector& theta_tilde) {
  return compute_bound(model, j, theta_tilde, true);
}

BatchBound bound_batch(const LogLinearModel& model, std::span<const std::size_t> batch,
                       const Vector& theta_tilde, BoundParts parts) {
  if (batch.empty()) throw InputError("bound_batch: empty batch");
  const std::size_t d = model.dim();
  BatchBound out;
  out.batch_size = batch.size();
  out.mu = Vector::Zero(static_cast<Eigen::Index>(d));
  out.curvature.dim = d;

  const bool full = parts == BoundParts::kFull;
  for (std::size_t j : batch) {
    if (j >= model.num_examples()) throw InputError("bound_batch: index out of range");
    SingleBound b = compute_bound(model, j, theta_tilde, full);
    out.mu += b.r;
    model.feature(j, model.observed_label(j)).axpy(-1.0, out.mu);
    if (full) {
      for (std::size_t k = 0; k < b.columns.size(); ++k) {
        out.curvature.columns.push_back(std::move(b.columns[k]));
        out.curvature.weights.push_back(b.weights[k]);
      }
      out.curvature.z_values.push_back(b.z);
      out.curvature.r_values.push_back(std::move(b.r));
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  out.mu *= inv;
  for (double& w : out.curvature.weights) w *= inv;
  return out;
}

}  // namespace sqb
