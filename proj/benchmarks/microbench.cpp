#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "sqb/sqb.hpp"
#include "support/fixtures.hpp"

namespace {

using namespace sqb;

// Shared across benchmarks so data generation stays out of the timings.
const LogisticInstance& adult_model() {
  static const LogisticInstance model = [] {
    const RawDataset raw = testing::adult_shaped(5000, 3);
    return to_logistic(raw, raw.dim());
  }();
  return model;
}

std::vector<std::size_t> first_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), 0);
  return out;
}

Vector small_weights(std::size_t d) {
  std::mt19937_64 rng(5);
  return testing::random_vector(rng, d, -0.1, 0.1);
}

void BM_BoundBatch(benchmark::State& state) {
  const auto& model = adult_model();
  const auto batch = first_indices(static_cast<std::size_t>(state.range(0)));
  const Vector theta = small_weights(model.dim());
  for (auto _ : state) benchmark::DoNotOptimize(bound_batch(model, batch, theta));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BoundBatch)->Arg(10)->Arg(100)->Arg(1000)->Arg(5000);

void BM_BoundBatchGradientOnly(benchmark::State& state) {
  const auto& model = adult_model();
  const auto batch = first_indices(static_cast<std::size_t>(state.range(0)));
  const Vector theta = small_weights(model.dim());
  for (auto _ : state) {
    benchmark::DoNotOptimize(bound_batch(model, batch, theta, BoundParts::kGradientOnly));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BoundBatchGradientOnly)->Arg(100)->Arg(5000);

void BM_CurvatureApply(benchmark::State& state) {
  const auto& model = adult_model();
  const auto batch = first_indices(static_cast<std::size_t>(state.range(0)));
  const BatchBound bound = bound_batch(model, batch, small_weights(model.dim()));
  const CurvatureOperator op(bound.curvature, 1e-3);
  const Vector x = small_weights(model.dim());
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(x));
}
BENCHMARK(BM_CurvatureApply)->Arg(10)->Arg(100)->Arg(1000);

void BM_Solve(benchmark::State& state) {
  const auto& model = adult_model();
  const auto batch = first_indices(200);
  const Vector theta = small_weights(model.dim());
  const BatchBound bound = bound_batch(model, batch, theta);
  const CurvatureOperator op(bound.curvature, 1e-3);
  const Vector rhs = bound.mu + 1e-3 * theta;
  const auto method = state.range(1) == 0 ? SolverMethod::kConjugateGradient : SolverMethod::kLsqr;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(op, rhs, static_cast<std::size_t>(state.range(0)), method));
  }
  state.SetLabel(std::string(solver_name(method)));
}
BENCHMARK(BM_Solve)->ArgsProduct({{5, 20, 100}, {0, 1}});

void BM_SgdPass(benchmark::State& state) {
  const auto& model = adult_model();
  const Objective objective(model, 1.0 / static_cast<double>(model.num_examples()));
  for (auto _ : state) {
    OptimizerState s = initial_state(model.dim(), 1);
    for (std::size_t i = 0; i < model.num_examples(); ++i) sgd_step(s, 0.01, objective);
    benchmark::DoNotOptimize(s.theta);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(model.num_examples()));
}
BENCHMARK(BM_SgdPass);

void BM_SqbStep(benchmark::State& state) {
  const auto& model = adult_model();
  SqbConfig config;
  config.eta = 1.0 / static_cast<double>(model.num_examples());
  config.solver_iters = 5;
  const auto b = static_cast<std::size_t>(state.range(0));
  config.gradient_schedule = {b, 0.0, std::nullopt};
  config.curvature_schedule = {b, 0.0, std::nullopt};
  OptimizerState s = initial_state(model.dim(), 1);
  for (auto _ : state) sqb_step(s, config, model);
}
BENCHMARK(BM_SqbStep)->Arg(10)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
