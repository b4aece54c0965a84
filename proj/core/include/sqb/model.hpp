#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace sqb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseVector = Eigen::SparseVector<double>;
using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Largest dimension for which full_hessian will materialize a dense matrix.
inline constexpr std::size_t kDenseHessianLimit = 2000;

/// Non-owning view of a sparse feature vector f_x(y). Indices are 0-based and
/// strictly increasing within one view.
struct FeatureView {
  std::span<const int> indices;
  std::span<const double> values;

  std::size_t nnz() const { return indices.size(); }
  double dot(const Vector& v) const;
  /// out += scale * f
  void axpy(double scale, Vector& out) const;
  double squared_norm() const;
  SparseVector to_sparse(Eigen::Index dim) const;
};

/// A conditional log-linear model over a finite outcome space:
///
///   p(y | x_j, theta) = h_j(y) exp(theta' f_j(y)) / Z_j(theta)
///
/// Implementations own the data; every accessor is a pure read.
class LogLinearModel {
 public:
  virtual ~LogLinearModel() = default;

  virtual std::size_t num_examples() const = 0;
  virtual std::size_t dim() const = 0;
  virtual std::size_t outcome_count(std::size_t j) const = 0;
  virtual FeatureView feature(std::size_t j, std::size_t y) const = 0;
  virtual double measure(std::size_t j, std::size_t y) const = 0;
  virtual std::size_t observed_label(std::size_t j) const = 0;

  /// Uniform upper bound on the largest eigenvalue of any per-example feature
  /// covariance. The default is max_{j,y} |f_j(y)|^2.
  virtual double covariance_bound() const;
};

/// Binary logistic regression as a log-linear model: outcomes {0, 1},
/// f_j(1) = x_j, f_j(0) = 0, h == 1.
class LogisticInstance final : public LogLinearModel {
 public:
  LogisticInstance(SparseRowMatrix features, std::vector<std::uint8_t> labels);

  std::size_t num_examples() const override { return labels_.size(); }
  std::size_t dim() const override { return static_cast<std::size_t>(features_.cols()); }
  std::size_t outcome_count(std::size_t) const override { return 2; }
  FeatureView feature(std::size_t j, std::size_t y) const override;
  double measure(std::size_t, std::size_t) const override { return 1.0; }
  std::size_t observed_label(std::size_t j) const override { return labels_[j]; }

  /// max_j |x_j|^2 / 4: the sigmoid's variance never exceeds 1/4.
  double covariance_bound() const override;

  FeatureView row(std::size_t j) const;
  const SparseRowMatrix& features() const { return features_; }
  const std::vector<std::uint8_t>& labels() const { return labels_; }

 private:
  SparseRowMatrix features_;
  std::vector<std::uint8_t> labels_;
};

/// General finite-outcome model with explicitly stored features and measures.
/// Used for multi-outcome instances (|Omega| > 2).
class TabularModel final : public LogLinearModel {
 public:
  struct Outcome {
    std::vector<std::pair<int, double>> features;  // (index, value), any order
    double measure = 1.0;
  };
  struct Example {
    std::vector<Outcome> outcomes;
    std::size_t label = 0;
  };

  TabularModel(std::size_t dim, const std::vector<Example>& examples);

  std::size_t num_examples() const override { return labels_.size(); }
  std::size_t dim() const override { return dim_; }
  std::size_t outcome_count(std::size_t j) const override {
    return example_offsets_[j + 1] - example_offsets_[j];
  }
  FeatureView feature(std::size_t j, std::size_t y) const override;
  double measure(std::size_t j, std::size_t y) const override {
    return measures_[example_offsets_[j] + y];
  }
  std::size_t observed_label(std::size_t j) const override { return labels_[j]; }

 private:
  std::size_t dim_;
  std::vector<std::size_t> example_offsets_;  // into outcome arrays
  std::vector<std::size_t> feature_offsets_;  // per outcome, into indices_/values_
  std::vector<int> indices_;
  std::vector<double> values_;
  std::vector<double> measures_;
  std::vector<std::size_t> labels_;
};

/// L_eta(theta) = (1/T) sum_j [log Z_j(theta) - theta' f_j(y_j)] + (eta/2)|theta|^2
class Objective {
 public:
  Objective(const LogLinearModel& model, double eta);

  const LogLinearModel& model() const { return *model_; }
  double eta() const { return eta_; }

 private:
  const LogLinearModel* model_;
  double eta_;
};

/// log Z_j(theta), evaluated with the max-exponent shift.
double log_partition(const LogLinearModel& model, std::size_t j, const Vector& theta);

/// Z_j(theta). Overflows to +inf when log Z exceeds the double range; use
/// log_partition for large inner products.
double partition_value(const LogLinearModel& model, std::size_t j, const Vector& theta);

/// p(y | x_j, theta) for every outcome y, in outcome order.
std::vector<double> outcome_probabilities(const LogLinearModel& model, std::size_t j,
                                          const Vector& theta);

/// E_{p_j}[f] at theta.
Vector expected_feature(const LogLinearModel& model, std::size_t j, const Vector& theta);

/// out += scale * (E_{p_j}[f] - f_j(y_j)), the unregularized gradient of the
/// j-th negative log-likelihood term.
void add_example_gradient(const LogLinearModel& model, std::size_t j, const Vector& theta,
                          double scale, Vector& out);

/// E_{p_j}[f] - f_j(y_j) as a sparse vector.
SparseVector example_gradient(const LogLinearModel& model, std::size_t j, const Vector& theta);

double objective_value(const Objective& objective, const Vector& theta);
Vector full_gradient(const Objective& objective, const Vector& theta);

/// Dense Hessian (1/T) sum_j cov_{p_j}[f] + eta I. Test oracle only; throws
/// CapabilityError when dim exceeds dense_limit.
Matrix full_hessian(const Objective& objective, const Vector& theta,
                    std::size_t dense_limit = kDenseHessianLimit);

/// Fraction of examples whose most probable outcome differs from the observed
/// label. Ties go to the highest outcome index, which for logistic models means
/// p = 0.5 predicts label 1.
double predict_error(const LogLinearModel& model, const Vector& theta);

}  // namespace sqb
