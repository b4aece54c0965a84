#pragma once

// Random instance generators and brute-force oracles shared by the unit and
// acceptance suites. Nothing here calls into the bound or solver code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sqb/bound.hpp"
#include "sqb/data_io.hpp"
#include "sqb/model.hpp"

namespace sqb::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vector random_vector(std::mt19937_64& rng, std::size_t d, double lo, double hi) {
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

/// Multi-outcome model: d features, 1..max_outcomes outcomes per example,
/// features in [-1, 1] with roughly 30% zeros, measures in (0, 2] with an
/// occasional zero (never on the observed outcome).
inline TabularModel random_tabular(std::mt19937_64& rng, std::size_t examples, std::size_t d,
                                   std::size_t min_outcomes, std::size_t max_outcomes) {
  std::vector<TabularModel::Example> data(examples);
  std::uniform_int_distribution<std::size_t> outcome_count(min_outcomes, max_outcomes);
  for (auto& ex : data) {
    ex.outcomes.resize(outcome_count(rng));
    for (auto& o : ex.outcomes) {
      for (std::size_t i = 0; i < d; ++i) {
        if (uniform(rng, 0.0, 1.0) < 0.3) continue;
        o.features.emplace_back(static_cast<int>(i), uniform(rng, -1.0, 1.0));
      }
      o.measure = uniform(rng, 0.0, 1.0) < 0.1 ? 0.0 : uniform(rng, 0.05, 2.0);
    }
    ex.label = std::uniform_int_distribution<std::size_t>(0, ex.outcomes.size() - 1)(rng);
    ex.outcomes[ex.label].measure = uniform(rng, 0.05, 2.0);
  }
  return TabularModel(d, data);
}

/// k random sparse columns in dimension d with weights in [0.01, 0.25].
inline BoundFactors random_factors(std::mt19937_64& rng, std::size_t d, std::size_t k,
                                   double density = 0.6) {
  BoundFactors f;
  f.dim = d;
  for (std::size_t c = 0; c < k; ++c) {
    SparseVector col(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      if (uniform(rng, 0.0, 1.0) < density) col.insertBack(static_cast<Eigen::Index>(i)) = uniform(rng, -1.0, 1.0);
    }
    f.columns.push_back(col);
    f.weights.push_back(uniform(rng, 0.01, 0.25));
  }
  return f;
}

/// Dense Gaussian logistic data with labels drawn from a planted model.
inline RawDataset synthetic_logistic(std::mt19937_64& rng, std::size_t examples, std::size_t d,
                                     double weight_scale = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector planted(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < planted.size(); ++i) planted[i] = weight_scale * normal(rng);
  RawDataset out;
  out.declared_dim = d;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t j = 0; j < examples; ++j) {
    SparseRow row;
    double margin = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double v = scale * normal(rng);
      row.emplace_back(static_cast<int>(i), v);
      margin += v * planted[static_cast<Eigen::Index>(i)];
    }
    const double p = 1.0 / (1.0 + std::exp(-margin));
    out.labels.push_back(uniform(rng, 0.0, 1.0) < p ? 1 : 0);
    out.rows.push_back(std::move(row));
  }
  return out;
}

/// Sparse binary data shaped like the UCI "adult" set in LIBSVM form: 123
/// one-hot features across 14 categorical groups, one active feature per
/// group, about a quarter positive labels.
inline RawDataset adult_shaped(std::size_t examples, std::uint64_t seed) {
  constexpr std::size_t kDim = 123;
  const std::vector<std::size_t> groups = {5, 7, 16, 7, 14, 6, 5, 2, 5, 5, 3, 9, 2, 37};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector weights(static_cast<Eigen::Index>(kDim));
  for (Eigen::Index i = 0; i < weights.size(); ++i) weights[i] = 1.2 * normal(rng);

  // Skewed category frequencies inside each group.
  std::vector<std::discrete_distribution<std::size_t>> pickers;
  for (std::size_t size : groups) {
    std::vector<double> w(size);
    for (std::size_t c = 0; c < size; ++c) w[c] = std::exp(-0.35 * static_cast<double>(c)) * uniform(rng, 0.5, 1.5);
    pickers.emplace_back(w.begin(), w.end());
  }

  RawDataset out;
  out.declared_dim = kDim;
  const double bias = -1.3;
  for (std::size_t j = 0; j < examples; ++j) {
    SparseRow row;
    std::size_t offset = 0;
    double margin = bias;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const std::size_t index = offset + pickers[g](rng);
      row.emplace_back(static_cast<int>(index), 1.0);
      margin += weights[static_cast<Eigen::Index>(index)] / 3.0;
      offset += groups[g];
    }
    const double p = 1.0 / (1.0 + std::exp(-margin));
    out.labels.push_back(uniform(rng, 0.0, 1.0) < p ? 1 : 0);
    out.rows.push_back(std::move(row));
  }
  return out;
}

/// Logistic instance from dense rows.
inline LogisticInstance logistic_from(const std::vector<std::vector<double>>& rows,
                                      const std::vector<std::uint8_t>& labels) {
  RawDataset raw;
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  raw.declared_dim = d;
  for (const auto& r : rows) {
    SparseRow row;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i] != 0.0) row.emplace_back(static_cast<int>(i), r[i]);
    }
    raw.rows.push_back(std::move(row));
  }
  raw.labels = labels;
  return to_logistic(raw, d);
}

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

/// Relative error |a - b| / max(|b|, floor).
inline double relative_error(const Vector& a, const Vector& b, double floor = 1e-12) {
  return (a - b).norm() / std::max(b.norm(), floor);
}

inline double relative_error(const Matrix& a, const Matrix& b, double floor = 1e-12) {
  return (a - b).norm() / std::max(b.norm(), floor);
}

/// Central differences of a scalar function.
template <typename F>
Vector numeric_gradient(F&& f, const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector plus = x;
    Vector minus = x;
    plus[i] += h;
    minus[i] -= h;
    g[i] = (f(plus) - f(minus)) / (2.0 * h);
  }
  return g;
}

/// Central differences of a vector function; column i is d F / d x_i.
template <typename F>
Matrix numeric_jacobian(F&& f, const Vector& x, double h = 1e-5) {
  const Vector base = f(x);
  Matrix jac(base.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector plus = x;
    Vector minus = x;
    plus[i] += h;
    minus[i] -= h;
    jac.col(i) = (f(plus) - f(minus)) / (2.0 * h);
  }
  return jac;
}

/// Brute-force log Z by direct summation over outcomes, no shifting.
inline double brute_log_partition(const LogLinearModel& model, std::size_t j, const Vector& theta) {
  double z = 0.0;
  for (std::size_t y = 0; y < model.outcome_count(j); ++y) {
    const Vector f = Vector(model.feature(j, y).to_sparse(theta.size()));
    z += model.measure(j, y) * std::exp(theta.dot(f));
  }
  return std::log(z);
}

/// Dense per-example covariance of the features under p_j(theta), computed by
/// enumeration.
inline Matrix brute_covariance(const LogLinearModel& model, std::size_t j, const Vector& theta) {
  const auto d = theta.size();
  const double log_z = brute_log_partition(model, j, theta);
  Vector mean = Vector::Zero(d);
  Matrix second = Matrix::Zero(d, d);
  for (std::size_t y = 0; y < model.outcome_count(j); ++y) {
    const Vector f = Vector(model.feature(j, y).to_sparse(d));
    const double p = model.measure(j, y) * std::exp(theta.dot(f) - log_z);
    mean += p * f;
    second += p * f * f.transpose();
  }
  return second - mean * mean.transpose();
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace sqb::testing
