#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqb/model.hpp"
#include "sqb/optimizer.hpp"

namespace sqb {

inline constexpr std::string_view kMetricsHeader =
    "effective_passes,wall_seconds,train_cost,train_excess_cost,test_cost,test_error";

struct MetricsRow {
  double effective_passes = 0.0;
  double wall_seconds = 0.0;
  double train_cost = 0.0;
  double train_excess_cost = 0.0;
  double test_cost = 0.0;   // mean negative log-likelihood, no ridge term
  double test_error = 0.0;  // NaN when there is no test set
};

struct RunConfig {
  std::string data_path;
  Method method = Method::kSqb;
  double alpha = 1.0;
  std::optional<double> eta;  // empty: 1 / T_train
  double gamma_mu = 0.05;
  double gamma_sigma = 0.001;
  std::size_t solver_iters = 5;
  SolverMethod solver = SolverMethod::kConjugateGradient;
  std::size_t b1_mu = 5;
  std::size_t b1_sigma = 5;
  std::optional<std::size_t> cap_mu;  // empty: full training set
  std::size_t cap_sigma = 200;
  double passes = 10.0;
  std::uint64_t seed = 0;
  std::string out_path;
  double split = 0.9;
  std::uint64_t split_seed = 0;
  double cadence = 0.1;
  bool unit_norm = false;

  /// Throws InputError on out-of-range values.
  void validate() const;
  /// Optimizer configuration for a training set of the given size.
  SqbConfig optimizer_config(std::size_t train_size) const;
};

struct ReferenceOptions {
  double gradient_tolerance = 1e-10;
  std::size_t max_iterations = 10000;
  std::optional<std::filesystem::path> cache_dir;
};

struct ReferenceOptimum {
  Vector theta;
  double cost = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool from_cache = false;
};

/// Cache directory from SQB_CACHE_DIR, if set and non-empty.
std::optional<std::filesystem::path> cache_dir_from_env();

/// FNV-1a over labels, measures and features of every example.
std::uint64_t dataset_hash(const LogLinearModel& model);

/// Full-batch SQB (alpha = 1, l = min(d, 100)) until |grad| <= tolerance.
/// Requires eta > 0. Throws ConvergenceError at the iteration cap.
ReferenceOptimum compute_reference_optimum(const LogLinearModel& model, double eta,
                                           const ReferenceOptions& options = {});

/// Runs one method on an in-memory train/test pair and returns the metric
/// series. `test` may be null.
std::vector<MetricsRow> run_benchmark(const RunOptions& options, const LogLinearModel& train,
                                      const LogLinearModel* test, const ReferenceOptimum& reference);

/// Loads, splits, optimizes and writes the CSV named by config.out_path
/// (stdout when empty). Returns the rows written.
std::vector<MetricsRow> run_experiment(const RunConfig& config);

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

/// Reads a metrics CSV, enforcing the exact header and six numeric columns per
/// row. Throws ParseError on any deviation.
std::vector<MetricsRow> read_metrics_csv(std::istream& in);

}  // namespace sqb
