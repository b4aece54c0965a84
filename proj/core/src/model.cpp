#include "sqb/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sqb/errors.hpp"

namespace sqb {

namespace {

void check_dim(const LogLinearModel& model, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != model.dim()) {
    throw InputError("theta has dimension " + std::to_string(theta.size()) + ", model expects " +
                     std::to_string(model.dim()));
  }
}

// log(h_j(y)) + theta' f_j(y) for every outcome; -inf for zero-measure outcomes.
void log_weights(const LogLinearModel& model, std::size_t j, const Vector& theta,
                 std::vector<double>& out) {
  const std::size_t n = model.outcome_count(j);
  out.resize(n);
  for (std::size_t y = 0; y < n; ++y) {
    const double h = model.measure(j, y);
    out[y] = h > 0.0 ? std::log(h) + model.feature(j, y).dot(theta)
                     : -std::numeric_limits<double>::infinity();
  }
}

double log_sum_exp(const std::vector<double>& logs) {
  const double m = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - m);
  return m + std::log(sum);
}

}  // namespace

double FeatureView::dot(const Vector& v) const {
  double s = 0.0;
  for (std::size_t i = 0; i < indices.size(); ++i) s += values[i] * v[indices[i]];
  return s;
}

void FeatureView::axpy(double scale, Vector& out) const {
  for (std::size_t i = 0; i < indices.size(); ++i) out[indices[i]] += scale * values[i];
}

double FeatureView::squared_norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return s;
}

SparseVector FeatureView::to_sparse(Eigen::Index dim) const {
  SparseVector out(dim);
  out.reserve(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) out.insertBack(indices[i]) = values[i];
  return out;
}

double LogLinearModel::covariance_bound() const {
  double best = 0.0;
  for (std::size_t j = 0; j < num_examples(); ++j) {
    for (std::size_t y = 0; y < outcome_count(j); ++y) {
      best = std::max(best, feature(j, y).squared_norm());
    }
  }
  return best;
}

LogisticInstance::LogisticInstance(SparseRowMatrix features, std::vector<std::uint8_t> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw InputError("feature rows (" + std::to_string(features_.rows()) +
                     ") and labels (" + std::to_string(labels_.size()) + ") differ in count");
  }
  for (std::size_t j = 0; j < labels_.size(); ++j) {
    if (labels_[j] > 1) throw InputError("logistic label must be 0 or 1 at row " + std::to_string(j));
  }
  features_.makeCompressed();
}

FeatureView LogisticInstance::row(std::size_t j) const {
  const auto* outer = features_.outerIndexPtr();
  const auto begin = static_cast<std::size_t>(outer[j]);
  const auto end = static_cast<std::size_t>(outer[j + 1]);
  return {std::span<const int>(features_.innerIndexPtr() + begin, end - begin),
          std::span<const double>(features_.valuePtr() + begin, end - begin)};
}

FeatureView LogisticInstance::feature(std::size_t j, std::size_t y) const {
  if (y == 0) return {};
  return row(j);
}

double LogisticInstance::covariance_bound() const {
  double best = 0.0;
  for (std::size_t j = 0; j < num_examples(); ++j) best = std::max(best, row(j).squared_norm());
  return best / 4.0;
}

TabularModel::TabularModel(std::size_t dim, const std::vector<Example>& examples) : dim_(dim) {
  example_offsets_.push_back(0);
  feature_offsets_.push_back(0);
  for (std::size_t j = 0; j < examples.size(); ++j) {
    const auto& ex = examples[j];
    if (ex.outcomes.empty()) throw InputError("example " + std::to_string(j) + " has no outcomes");
    if (ex.label >= ex.outcomes.size()) {
      throw InputError("example " + std::to_string(j) + " label out of range");
    }
    bool any_positive = false;
    for (const auto& outcome : ex.outcomes) {
      if (!(outcome.measure >= 0.0) || !std::isfinite(outcome.measure)) {
        throw InputError("example " + std::to_string(j) + " has a negative or non-finite measure");
      }
      any_positive = any_positive || outcome.measure > 0.0;
      auto pairs = outcome.features;
      std::sort(pairs.begin(), pairs.end());
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [index, value] = pairs[i];
        if (index < 0 || static_cast<std::size_t>(index) >= dim) {
          throw InputError("feature index " + std::to_string(index) + " outside dimension " +
                           std::to_string(dim));
        }
        if (i > 0 && pairs[i - 1].first == index) {
          throw InputError("duplicate feature index " + std::to_string(index));
        }
        indices_.push_back(index);
        values_.push_back(value);
      }
      feature_offsets_.push_back(indices_.size());
      measures_.push_back(outcome.measure);
    }
    if (!any_positive) throw InputError("example " + std::to_string(j) + " has all-zero measures");
    if (!(ex.outcomes[ex.label].measure > 0.0)) {
      throw InputError("example " + std::to_string(j) + " observes a zero-measure outcome");
    }
    example_offsets_.push_back(measures_.size());
    labels_.push_back(ex.label);
  }
}

FeatureView TabularModel::feature(std::size_t j, std::size_t y) const {
  const std::size_t o = example_offsets_[j] + y;
  const std::size_t begin = feature_offsets_[o];
  const std::size_t end = feature_offsets_[o + 1];
  return {std::span<const int>(indices_.data() + begin, end - begin),
          std::span<const double>(values_.data() + begin, end - begin)};
}

Objective::Objective(const LogLinearModel& model, double eta) : model_(&model), eta_(eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw InputError("eta must be finite and >= 0");
}

double log_partition(const LogLinearModel& model, std::size_t j, const Vector& theta) {
  check_dim(model, theta);
  std::vector<double> logs;
  log_weights(model, j, theta, logs);
  return log_sum_exp(logs);
}

double partition_value(const LogLinearModel& model, std::size_t j, const Vector& theta) {
  return std::exp(log_partition(model, j, theta));
}

std::vector<double> outcome_probabilities(const LogLinearModel& model, std::size_t j,
                                          const Vector& theta) {
  check_dim(model, theta);
  std::vector<double> logs;
  log_weights(model, j, theta, logs);
  const double lz = log_sum_exp(logs);
  for (double& l : logs) l = std::exp(l - lz);
  return logs;
}

Vector expected_feature(const LogLinearModel& model, std::size_t j, const Vector& theta) {
  const auto probs = outcome_probabilities(model, j, theta);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(model.dim()));
  for (std::size_t y = 0; y < probs.size(); ++y) {
    if (probs[y] > 0.0) model.feature(j, y).axpy(probs[y], out);
  }
  return out;
}

void add_example_gradient(const LogLinearModel& model, std::size_t j, const Vector& theta,
                          double scale, Vector& out) {
  const auto probs = outcome_probabilities(model, j, theta);
  for (std::size_t y = 0; y < probs.size(); ++y) {
    if (probs[y] > 0.0) model.feature(j, y).axpy(scale * probs[y], out);
  }
  model.feature(j, model.observed_label(j)).axpy(-scale, out);
}

SparseVector example_gradient(const LogLinearModel& model, std::size_t j, const Vector& theta) {
  const auto probs = outcome_probabilities(model, j, theta);
  const auto dim = static_cast<Eigen::Index>(model.dim());
  SparseVector out(dim);
  for (std::size_t y = 0; y < probs.size(); ++y) {
    if (probs[y] > 0.0) out += probs[y] * model.feature(j, y).to_sparse(dim);
  }
  out -= model.feature(j, model.observed_label(j)).to_sparse(dim);
  return out;
}

double objective_value(const Objective& objective, const Vector& theta) {
  const auto& model = objective.model();
  check_dim(model, theta);
  const std::size_t n = model.num_examples();
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    sum += log_partition(model, j, theta) - model.feature(j, model.observed_label(j)).dot(theta);
  }
  const double data = n > 0 ? sum / static_cast<double>(n) : 0.0;
  return data + 0.5 * objective.eta() * theta.squaredNorm();
}

Vector full_gradient(const Objective& objective, const Vector& theta) {
  const auto& model = objective.model();
  check_dim(model, theta);
  const std::size_t n = model.num_examples();
  Vector grad = Vector::Zero(theta.size());
  for (std::size_t j = 0; j < n; ++j) add_example_gradient(model, j, theta, 1.0, grad);
  if (n > 0) grad /= static_cast<double>(n);
  grad += objective.eta() * theta;
  return grad;
}

Matrix full_hessian(const Objective& objective, const Vector& theta, std::size_t dense_limit) {
  const auto& model = objective.model();
  check_dim(model, theta);
  if (model.dim() > dense_limit) {
    throw CapabilityError("dense Hessian requested for dimension " + std::to_string(model.dim()) +
                          " above limit " + std::to_string(dense_limit));
  }
  const auto d = static_cast<Eigen::Index>(model.dim());
  const std::size_t n = model.num_examples();
  Matrix hess = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < n; ++j) {
    const auto probs = outcome_probabilities(model, j, theta);
    const Vector mean = expected_feature(model, j, theta);
    for (std::size_t y = 0; y < probs.size(); ++y) {
      if (probs[y] == 0.0) continue;
      Vector centered = -mean;
      model.feature(j, y).axpy(1.0, centered);
      hess.noalias() += probs[y] * centered * centered.transpose();
    }
  }
  if (n > 0) hess /= static_cast<double>(n);
  hess.diagonal().array() += objective.eta();
  return hess;
}

double predict_error(const LogLinearModel& model, const Vector& theta) {
  check_dim(model, theta);
  const std::size_t n = model.num_examples();
  if (n == 0) throw InputError("predict_error on an empty set");
  std::vector<double> logs;
  std::size_t wrong = 0;
  for (std::size_t j = 0; j < n; ++j) {
    log_weights(model, j, theta, logs);
    std::size_t best = 0;
    for (std::size_t y = 1; y < logs.size(); ++y) {
      if (logs[y] >= logs[best]) best = y;
    }
    if (best != model.observed_label(j)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(n);
}

}  // namespace sqb
