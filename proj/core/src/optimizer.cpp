#include "sqb/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "sqb/bound.hpp"
#include "sqb/curvature.hpp"
#include "sqb/errors.hpp"

namespace sqb {

namespace {

constexpr std::size_t kSagRefreshFactor = 1;  // full recompute every T updates

[[noreturn]] void abort_step(std::string_view method, const OptimizerState& state,
                             std::string_view what, double extra = 0.0) {
  std::ostringstream msg;
  msg << method << " step aborted: " << what << " (iteration " << state.iteration + 1
      << ", data touches " << state.data_touches << ", |theta| " << state.theta.norm();
  if (extra != 0.0) msg << ", detail " << extra;
  msg << ")";
  throw SolverError(msg.str());
}

std::size_t batch_size(const BatchSchedule& schedule, std::int64_t k, std::size_t population) {
  return std::min(schedule.size_at(k), population);
}

double step_at(const SqbConfig& config, std::uint64_t k) {
  return config.step_policy == StepPolicy::kHarmonic ? config.step_size / static_cast<double>(k)
                                                     : config.step_size;
}

std::size_t pick_example(OptimizerState& state, std::size_t population) {
  std::uniform_int_distribution<std::size_t> pick(0, population - 1);
  return pick(state.example_rng);
}

// theta <- (1 - step * eta) theta - step * grad_j(theta)
void ridge_gradient_step(Vector& theta, const SparseVector& data_grad, double step, double eta) {
  theta *= 1.0 - step * eta;
  theta -= step * data_grad;
}

std::uint64_t touches_for(double passes, std::size_t population) {
  const double x = passes * static_cast<double>(population);
  return static_cast<std::uint64_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

}  // namespace

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kSqb: return "sqb";
    case Method::kSgd: return "sgd";
    case Method::kAsgd: return "asgd";
    case Method::kSag: return "sag";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "sqb") return Method::kSqb;
  if (name == "sgd") return Method::kSgd;
  if (name == "asgd") return Method::kAsgd;
  if (name == "sag") return Method::kSag;
  throw InputError("unknown method '" + std::string(name) + "'");
}

void SqbConfig::validate() const {
  if (!(step_size >= 0.0) || !std::isfinite(step_size)) throw InputError("step size must be >= 0");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw InputError("eta must be >= 0");
  if (solver_iters < 1) throw InputError("solver iterations must be >= 1");
  if (!(max_effective_passes >= 0.0)) throw InputError("pass budget must be >= 0");
  gradient_schedule.validate();
  curvature_schedule.validate();
}

OptimizerState initial_state(std::size_t dim, std::uint64_t seed) {
  OptimizerState state;
  state.theta = Vector::Zero(static_cast<Eigen::Index>(dim));
  state.theta_average = state.theta;
  state.streams = RandomStreams(seed);
  state.example_rng = state.streams.stream(StreamPurpose::kSgdExample, 0);
  return state;
}

SagMemory::SagMemory(const LogLinearModel& model)
    : table_(model.num_examples(), SparseVector(static_cast<Eigen::Index>(model.dim()))),
      seen_(model.num_examples(), false),
      sum_(Vector::Zero(static_cast<Eigen::Index>(model.dim()))) {}

void SagMemory::replace(std::size_t j, SparseVector gradient) {
  sum_ -= table_[j];
  sum_ += gradient;
  table_[j] = std::move(gradient);
  if (!seen_[j]) {
    seen_[j] = true;
    ++visited_;
  }
  if (++updates_since_refresh_ >= kSagRefreshFactor * table_.size()) {
    sum_ = table_sum();
    updates_since_refresh_ = 0;
  }
}

Vector SagMemory::table_sum() const {
  Vector out = Vector::Zero(sum_.size());
  for (const auto& g : table_) out += g;
  return out;
}

void sqb_step(OptimizerState& state, const SqbConfig& config, const LogLinearModel& model) {
  const std::size_t population = model.num_examples();
  const auto k = static_cast<std::int64_t>(state.iteration + 1);
  const BatchDraw batches =
      draw_batches(state.streams, state.iteration + 1, population,
                   batch_size(config.gradient_schedule, k, population),
                   batch_size(config.curvature_schedule, k, population));

  const Vector mu =
      bound_batch(model, batches.gradient_batch, state.theta, BoundParts::kGradientOnly).mu;
  const BatchBound curvature =
      bound_batch(model, batches.curvature_batch, state.theta, BoundParts::kFull);

  const Vector rhs = mu + config.eta * state.theta;
  const CurvatureOperator op(curvature.curvature, config.eta);
  const SolveReport report = solve(op, rhs, config.solver_iters, config.solver);
  if (!report.solution.allFinite()) abort_step("sqb", state, "non-finite solver output", rhs.norm());

  state.theta -= step_at(config, state.iteration + 1) * report.solution;
  if (!state.theta.allFinite()) abort_step("sqb", state, "non-finite parameters");
  state.data_touches += batches.gradient_batch.size() + batches.curvature_batch.size();
  ++state.iteration;
}

Vector sqb_full_batch_update(const Objective& objective, const Vector& theta, double step_size,
                             std::size_t solver_iters, SolverMethod solver) {
  const auto& model = objective.model();
  std::vector<std::size_t> all(model.num_examples());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  const BatchBound bound = bound_batch(model, all, theta, BoundParts::kFull);
  const CurvatureOperator op(bound.curvature, objective.eta());
  const SolveReport report = solve(op, bound.mu + objective.eta() * theta, solver_iters, solver);
  if (!report.solution.allFinite()) throw SolverError("full-batch sqb: non-finite solver output");
  return theta - step_size * report.solution;
}

void sgd_step(OptimizerState& state, double step_size, const Objective& objective) {
  const auto& model = objective.model();
  const std::size_t j = pick_example(state, model.num_examples());
  const SparseVector grad = example_gradient(model, j, state.theta);
  ridge_gradient_step(state.theta, grad, step_size, objective.eta());
  if (!state.theta.allFinite()) abort_step("sgd", state, "non-finite parameters");
  ++state.data_touches;
  ++state.iteration;
}

void asgd_step(OptimizerState& state, double step_size, const Objective& objective) {
  sgd_step(state, step_size, objective);
  const auto k = static_cast<double>(state.iteration);
  state.theta_average += (state.theta - state.theta_average) / k;
}

void sag_step(OptimizerState& state, SagMemory& memory, const Objective& objective,
              double lipschitz) {
  const auto& model = objective.model();
  const std::size_t population = model.num_examples();
  const std::size_t j = pick_example(state, population);
  memory.replace(j, example_gradient(model, j, state.theta));
  const double step = 1.0 / lipschitz;
  state.theta *= 1.0 - step * objective.eta();
  state.theta -= (step / static_cast<double>(population)) * memory.running_sum();
  if (!state.theta.allFinite()) abort_step("sag", state, "non-finite parameters");
  ++state.data_touches;
  ++state.iteration;
}

double sag_lipschitz_constant(const Objective& objective) {
  return objective.model().covariance_bound() + objective.eta();
}

const Vector& reported_parameters(Method method, const OptimizerState& state) {
  return method == Method::kAsgd ? state.theta_average : state.theta;
}

OptimizerState run(const RunOptions& options, const LogLinearModel& model, const RecordFn& record) {
  const SqbConfig& config = options.config;
  config.validate();
  if (!(options.cadence > 0.0)) throw InputError("metric cadence must be > 0");
  const std::size_t population = model.num_examples();
  if (population == 0) throw InputError("run: empty training set");

  const Objective objective(model, config.eta);
  OptimizerState state = initial_state(model.dim(), config.seed);
  std::optional<SagMemory> memory;
  double lipschitz = 0.0;
  if (options.method == Method::kSag) {
    memory.emplace(model);
    lipschitz = sag_lipschitz_constant(objective);
    if (!(lipschitz > 0.0)) throw InputError("sag: Lipschitz constant must be > 0");
  }

  const std::uint64_t budget = touches_for(config.max_effective_passes, population);
  std::uint64_t next_tick = 1;
  double elapsed = 0.0;
  record(reported_parameters(options.method, state), state, elapsed);

  while (state.data_touches < budget) {
    const auto start = std::chrono::steady_clock::now();
    switch (options.method) {
      case Method::kSqb: sqb_step(state, config, model); break;
      case Method::kSgd: sgd_step(state, config.step_size, objective); break;
      case Method::kAsgd: asgd_step(state, config.step_size, objective); break;
      case Method::kSag: sag_step(state, *memory, objective, lipschitz); break;
    }
    elapsed += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const bool done = state.data_touches >= budget;
    const bool crossed =
        state.data_touches >= touches_for(options.cadence * static_cast<double>(next_tick), population);
    if (crossed || done) {
      record(reported_parameters(options.method, state), state, elapsed);
      while (touches_for(options.cadence * static_cast<double>(next_tick), population) <=
             state.data_touches) {
        ++next_tick;
      }
    }
  }
  return state;
}

}  // namespace sqb
