#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "sqb/errors.hpp"
#include "sqb/optimizer.hpp"
#include "support/fixtures.hpp"

namespace sqb {
namespace {

LogisticInstance single_positive() { return testing::logistic_from({{1.0, 0.0}}, {1}); }

SqbConfig full_batch_config(std::size_t population, std::size_t dim, double eta) {
  SqbConfig c;
  c.eta = eta;
  c.gradient_schedule = {population, 0.0, population};
  c.curvature_schedule = {population, 0.0, population};
  c.solver_iters = dim;
  return c;
}

// Damped Newton on the dense Hessian; the oracle for optimum checks.
Vector newton_optimum(const Objective& objective) {
  Vector theta = Vector::Zero(static_cast<Eigen::Index>(objective.model().dim()));
  for (int it = 0; it < 100; ++it) {
    const Vector g = full_gradient(objective, theta);
    if (g.norm() < 1e-13) break;
    theta -= full_hessian(objective, theta).ldlt().solve(g);
  }
  return theta;
}

TEST(Method, NamesRoundTrip) {
  for (Method m : {Method::kSqb, Method::kSgd, Method::kAsgd, Method::kSag}) {
    EXPECT_EQ(parse_method(method_name(m)), m);
  }
  EXPECT_THROW(parse_method("lbfgs"), InputError);
}

TEST(SqbStep, FullBatchSingleExample) {
  const auto model = single_positive();
  auto state = initial_state(2, 0);
  sqb_step(state, full_batch_config(1, 2, 0.0), model);
  EXPECT_NEAR(state.theta[0], 2.0, 1e-12);
  EXPECT_NEAR(state.theta[1], 0.0, 1e-12);
  EXPECT_EQ(state.iteration, 1u);
  EXPECT_EQ(state.data_touches, 2u);
}

TEST(SqbStep, LargeRidgeShrinksTowardZero) {
  const auto model = single_positive();
  auto config = full_batch_config(1, 2, 1e6);
  config.step_size = 0.5;
  auto state = initial_state(2, 0);
  state.theta << 1.0, -2.0;
  const Vector before = state.theta;
  sqb_step(state, config, model);
  EXPECT_LE((state.theta - 0.5 * before).norm(), 1e-5);
}

TEST(SqbStep, StationaryPointIsFixed) {
  // Two opposite labels on the same input: the data gradient vanishes at zero.
  const auto model = testing::logistic_from({{1.0, 0.0}, {1.0, 0.0}}, {0, 1});
  auto state = initial_state(2, 0);
  sqb_step(state, full_batch_config(2, 2, 0.3), model);
  EXPECT_LE(state.theta.norm(), 1e-15);
}

TEST(SqbStep, TouchesCountBothBatches) {
  std::mt19937_64 rng(3);
  const auto model = to_logistic(testing::synthetic_logistic(rng, 100, 5), 5);
  SqbConfig config;
  config.gradient_schedule = {7, 0.0, std::nullopt};
  config.curvature_schedule = {3, 0.0, 200};
  auto state = initial_state(5, 1);
  sqb_step(state, config, model);
  sqb_step(state, config, model);
  EXPECT_EQ(state.data_touches, 20u);
}

TEST(SqbStep, HarmonicPolicyScalesSecondStep) {
  std::mt19937_64 rng(4);
  const auto model = to_logistic(testing::synthetic_logistic(rng, 50, 4), 4);
  auto constant = full_batch_config(50, 4, 0.1);
  auto harmonic = constant;
  harmonic.step_policy = StepPolicy::kHarmonic;

  auto a = initial_state(4, 0);
  auto b = initial_state(4, 0);
  sqb_step(a, constant, model);
  sqb_step(b, harmonic, model);
  EXPECT_LE((a.theta - b.theta).norm(), 1e-15);

  const Objective objective(model, 0.1);
  const Vector full_step = sqb_full_batch_update(objective, b.theta, 1.0, 4);
  const Vector expected = b.theta + 0.5 * (full_step - b.theta);
  sqb_step(b, harmonic, model);
  EXPECT_LE((b.theta - expected).norm(), 1e-12);
}

TEST(SqbFullBatch, DecreasesObjective) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = testing::random_tabular(rng, 30, 6, 2, 5);
    const Objective objective(model, testing::uniform(rng, 0.0, 0.5));
    Vector theta = testing::random_vector(rng, 6, -2.0, 2.0);
    for (int it = 0; it < 5; ++it) {
      const Vector next = sqb_full_batch_update(objective, theta, 1.0, 6);
      EXPECT_LE(objective_value(objective, next), objective_value(objective, theta) + 1e-12);
      theta = next;
    }
  }
}

TEST(SqbFullBatch, OptimumIsFixedPoint) {
  std::mt19937_64 rng(6);
  const auto model = testing::random_tabular(rng, 40, 5, 2, 4);
  const Objective objective(model, 0.2);
  const Vector optimum = newton_optimum(objective);
  EXPECT_LE((sqb_full_batch_update(objective, optimum, 1.0, 5) - optimum).norm(), 1e-10);
}

TEST(SgdStep, SingleExample) {
  const auto model = single_positive();
  const Objective objective(model, 0.0);
  auto state = initial_state(2, 0);
  sgd_step(state, 1.0, objective);
  EXPECT_NEAR(state.theta[0], 0.5, 1e-15);
  EXPECT_EQ(state.theta[1], 0.0);
  EXPECT_EQ(state.data_touches, 1u);
}

TEST(SgdStep, ZeroStepLeavesParameters) {
  const auto model = single_positive();
  const Objective objective(model, 0.5);
  auto state = initial_state(2, 0);
  state.theta << 0.3, -0.7;
  const Vector before = state.theta;
  sgd_step(state, 0.0, objective);
  EXPECT_EQ(state.theta, before);
}

TEST(SgdStep, MovesTowardSeparatingDirection) {
  const auto model = single_positive();
  const Objective objective(model, 0.0);
  auto state = initial_state(2, 0);
  double previous = state.theta[0];
  for (int i = 0; i < 5; ++i) {
    sgd_step(state, 1.0, objective);
    EXPECT_GT(state.theta[0], previous);
    previous = state.theta[0];
  }
}

TEST(AsgdStep, AverageIsMeanOfIterates) {
  std::mt19937_64 rng(7);
  const auto model = to_logistic(testing::synthetic_logistic(rng, 30, 3), 3);
  const Objective objective(model, 0.01);
  auto state = initial_state(3, 2);
  Vector sum = Vector::Zero(3);
  for (int k = 1; k <= 50; ++k) {
    asgd_step(state, 0.3, objective);
    sum += state.theta;
    EXPECT_LE((state.theta_average - sum / k).norm(), 1e-12);
  }
}

TEST(AsgdStep, ConstantIteratesAverageToThemselves) {
  const auto model = single_positive();
  const Objective objective(model, 0.0);
  auto state = initial_state(2, 0);
  for (int k = 0; k < 4; ++k) asgd_step(state, 0.0, objective);
  EXPECT_EQ(state.theta_average, state.theta);
}

TEST(Sag, LipschitzConstant) {
  const auto model = testing::logistic_from({{2.0, 0.0}, {0.0, 2.0}, {1.2, 1.6}}, {0, 1, 1});
  EXPECT_NEAR(sag_lipschitz_constant(Objective(model, 0.1)), 1.1, 1e-15);
}

TEST(Sag, FirstStepUsesSingleEntry) {
  const auto model = testing::logistic_from({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}, {1, 0, 1});
  const Objective objective(model, 0.0);
  const double lipschitz = sag_lipschitz_constant(objective);
  auto state = initial_state(2, 9);
  SagMemory memory(model);

  auto predictor = state.example_rng;
  const std::size_t j = std::uniform_int_distribution<std::size_t>(0, 2)(predictor);
  const Vector g = Vector(example_gradient(model, j, state.theta));

  sag_step(state, memory, objective, lipschitz);
  EXPECT_LE((state.theta - (-(1.0 / lipschitz) * g / 3.0)).norm(), 1e-15);
  EXPECT_EQ(memory.visited(), 1u);
}

TEST(Sag, TableAudit) {
  const auto model = testing::logistic_from({{1.0, 0.5}, {-0.3, 1.0}, {0.8, -0.9}}, {1, 0, 1});
  const Objective objective(model, 0.05);
  const double lipschitz = sag_lipschitz_constant(objective);
  auto state = initial_state(2, 4);
  SagMemory memory(model);

  // Independent record of the parameters each example was last evaluated at.
  std::vector<std::optional<Vector>> evaluated_at(3);
  for (int step = 0; step < 40; ++step) {
    auto predictor = state.example_rng;
    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, 2)(predictor);
    evaluated_at[j] = state.theta;
    sag_step(state, memory, objective, lipschitz);

    Vector expected = Vector::Zero(2);
    for (std::size_t i = 0; i < 3; ++i) {
      if (evaluated_at[i]) expected += Vector(example_gradient(model, i, *evaluated_at[i]));
    }
    EXPECT_LE((memory.running_sum() - expected).norm(), 1e-12);
    EXPECT_LE((memory.table_sum() - expected).norm(), 1e-12);
  }
  EXPECT_EQ(memory.visited(), 3u);
}

TEST(Run, ZeroBudgetRecordsInitialPoint) {
  const auto model = single_positive();
  RunOptions options;
  options.config.max_effective_passes = 0.0;
  int rows = 0;
  run(options, model, [&](const Vector& theta, const OptimizerState& state, double seconds) {
    ++rows;
    EXPECT_EQ(theta.norm(), 0.0);
    EXPECT_EQ(state.data_touches, 0u);
    EXPECT_EQ(seconds, 0.0);
  });
  EXPECT_EQ(rows, 1);
}

TEST(Run, RecordsAtCadenceAndStopsAtBudget) {
  std::mt19937_64 rng(8);
  const auto model = to_logistic(testing::synthetic_logistic(rng, 100, 4), 4);
  for (Method method : {Method::kSqb, Method::kSgd, Method::kAsgd, Method::kSag}) {
    RunOptions options;
    options.method = method;
    options.config.eta = 0.01;
    options.config.step_size = 0.1;
    options.config.max_effective_passes = 2.0;
    options.cadence = 0.25;
    std::vector<double> passes;
    const auto final_state = run(options, model, [&](const Vector&, const OptimizerState& s, double) {
      passes.push_back(s.effective_passes(100));
    });
    ASSERT_GE(passes.size(), 2u);
    EXPECT_EQ(passes.front(), 0.0);
    EXPECT_GE(passes.back(), 2.0);
    EXPECT_EQ(passes.back(), final_state.effective_passes(100));
    for (std::size_t i = 1; i < passes.size(); ++i) EXPECT_GT(passes[i], passes[i - 1]);
    if (method != Method::kSqb) {
      // Single-example methods hit every cadence point exactly.
      EXPECT_EQ(passes.size(), 9u);
      EXPECT_DOUBLE_EQ(passes.back(), 2.0);
    }
  }
}

TEST(Run, DeterministicForFixedSeed) {
  std::mt19937_64 rng(9);
  const auto model = to_logistic(testing::synthetic_logistic(rng, 80, 6), 6);
  for (Method method : {Method::kSqb, Method::kSgd, Method::kAsgd, Method::kSag}) {
    RunOptions options;
    options.method = method;
    options.config.eta = 0.01;
    options.config.step_size = 0.1;
    options.config.max_effective_passes = 3.0;
    options.config.seed = 77;
    const auto ignore = [](const Vector&, const OptimizerState&, double) {};
    const auto a = run(options, model, ignore);
    const auto b = run(options, model, ignore);
    EXPECT_EQ(a.theta, b.theta);
    EXPECT_EQ(a.theta_average, b.theta_average);
    options.config.seed = 78;
    EXPECT_NE(run(options, model, ignore).theta, a.theta);
  }
}

TEST(Run, SqbConvergesOnSmallProblem) {
  std::mt19937_64 rng(10);
  const auto model = to_logistic(testing::synthetic_logistic(rng, 200, 10), 10);
  const Objective objective(model, 0.1);
  const double best = objective_value(objective, newton_optimum(objective));

  RunOptions options;
  options.config.eta = 0.1;
  options.config.max_effective_passes = 50.0;
  options.config.solver_iters = 10;
  // Growing gradient batches: the full set is reached after 40 iterations.
  options.config.gradient_schedule = {5, 5.0, std::nullopt};
  double last_excess = 0.0;
  run(options, model, [&](const Vector& theta, const OptimizerState&, double) {
    last_excess = objective_value(objective, theta) - best;
  });
  EXPECT_GE(last_excess, -1e-12);
  EXPECT_LE(last_excess, 1e-6);
}

TEST(Run, RejectsBadSettings) {
  const auto model = single_positive();
  const auto ignore = [](const Vector&, const OptimizerState&, double) {};
  RunOptions options;
  options.cadence = 0.0;
  EXPECT_THROW(run(options, model, ignore), InputError);
  options.cadence = 0.1;
  options.config.solver_iters = 0;
  EXPECT_THROW(run(options, model, ignore), InputError);
  options.config.solver_iters = 5;
  options.config.eta = -1.0;
  EXPECT_THROW(run(options, model, ignore), InputError);
}

}  // namespace
}  // namespace sqb
