#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string_view>
#include <vector>

#include "sqb/curvature.hpp"
#include "sqb/model.hpp"
#include "sqb/sampling.hpp"

namespace sqb {

enum class Method { kSqb, kSgd, kAsgd, kSag };

std::string_view method_name(Method method);
Method parse_method(std::string_view name);

enum class StepPolicy {
  kConstant,  // alpha_k = alpha
  kHarmonic,  // alpha_k = alpha / k (square-summable)
};

struct SqbConfig {
  double step_size = 1.0;
  StepPolicy step_policy = StepPolicy::kConstant;
  double eta = 0.0;
  /// An empty cap on the gradient schedule means the full training set.
  BatchSchedule gradient_schedule{5, 0.05, std::nullopt};
  BatchSchedule curvature_schedule{5, 0.001, 200};
  std::size_t solver_iters = 5;
  SolverMethod solver = SolverMethod::kConjugateGradient;
  double max_effective_passes = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct OptimizerState {
  Vector theta;
  /// Running average of SGD iterates (ASGD only).
  Vector theta_average;
  std::uint64_t iteration = 0;
  std::uint64_t data_touches = 0;
  RandomStreams streams{0};
  std::mt19937_64 example_rng;

  double effective_passes(std::size_t num_examples) const {
    return static_cast<double>(data_touches) / static_cast<double>(num_examples);
  }
};

OptimizerState initial_state(std::size_t dim, std::uint64_t seed);

/// Per-example gradient table for SAG. Entries hold the data part
/// E_p[f] - f(y_j) of each example's gradient; the ridge term is applied with
/// the current iterate.
class SagMemory {
 public:
  explicit SagMemory(const LogLinearModel& model);

  void replace(std::size_t j, SparseVector gradient);
  const Vector& running_sum() const { return sum_; }
  const SparseVector& entry(std::size_t j) const { return table_[j]; }
  /// Sum of the table recomputed from scratch.
  Vector table_sum() const;
  std::size_t visited() const { return visited_; }

 private:
  std::vector<SparseVector> table_;
  std::vector<bool> seen_;
  Vector sum_;
  std::size_t visited_ = 0;
  std::size_t updates_since_refresh_ = 0;
};

/// One SQB iteration: independent gradient and curvature batches, truncated
/// solve of (Sigma_S + eta I) xi = mu_T + eta theta, theta -= alpha_k xi.
void sqb_step(OptimizerState& state, const SqbConfig& config, const LogLinearModel& model);

/// Full-batch SQB update with a single bound evaluation on every example.
/// Used for reference optima; does not touch the state counters.
Vector sqb_full_batch_update(const Objective& objective, const Vector& theta, double step_size,
                             std::size_t solver_iters,
                             SolverMethod solver = SolverMethod::kConjugateGradient);

void sgd_step(OptimizerState& state, double step_size, const Objective& objective);
void asgd_step(OptimizerState& state, double step_size, const Objective& objective);
void sag_step(OptimizerState& state, SagMemory& memory, const Objective& objective,
              double lipschitz);

/// covariance_bound() + eta; for logistic models max_j |x_j|^2 / 4 + eta.
double sag_lipschitz_constant(const Objective& objective);

/// Parameter vector a method reports (the average for ASGD).
const Vector& reported_parameters(Method method, const OptimizerState& state);

/// Called with the reported parameters, the state, and accumulated optimizer
/// wall time in seconds.
using RecordFn = std::function<void(const Vector&, const OptimizerState&, double)>;

struct RunOptions {
  Method method = Method::kSqb;
  SqbConfig config;
  double cadence = 0.1;  // effective passes between records
};

/// Runs until the effective-pass budget is spent. Records the initial point,
/// every cadence crossing, and the final point.
OptimizerState run(const RunOptions& options, const LogLinearModel& model, const RecordFn& record);

}  // namespace sqb
