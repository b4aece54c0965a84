#include "sqb/experiment.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sqb/bound.hpp"
#include "sqb/curvature.hpp"
#include "sqb/data_io.hpp"
#include "sqb/errors.hpp"

namespace sqb {

namespace {

constexpr std::size_t kReferenceSolverCap = 100;
constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t word) {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xffU;
    h *= kFnvPrime;
  }
}

std::string hex64(std::uint64_t x) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(x));
  return buffer;
}

std::filesystem::path cache_path(const std::filesystem::path& dir, std::uint64_t hash, double eta) {
  return dir / ("refopt_" + hex64(hash) + "_" + hex64(std::bit_cast<std::uint64_t>(eta)) + ".json");
}

std::optional<ReferenceOptimum> load_cached(const std::filesystem::path& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const auto doc = nlohmann::json::parse(in);
    const auto values = doc.at("theta").get<std::vector<double>>();
    if (values.size() != dim) return std::nullopt;
    ReferenceOptimum out;
    out.theta = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    out.cost = doc.at("cost").get<double>();
    out.gradient_norm = doc.at("gradient_norm").get<double>();
    out.iterations = doc.at("iterations").get<std::size_t>();
    out.from_cache = true;
    return out;
  } catch (const nlohmann::json::exception& e) {
    std::clog << "sqb: ignoring unreadable cache entry " << path << ": " << e.what() << '\n';
    return std::nullopt;
  }
}

void store_cached(const std::filesystem::path& path, const ReferenceOptimum& ref) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  nlohmann::json doc;
  doc["theta"] = std::vector<double>(ref.theta.data(), ref.theta.data() + ref.theta.size());
  doc["cost"] = ref.cost;
  doc["gradient_norm"] = ref.gradient_norm;
  doc["iterations"] = ref.iterations;
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) {
      std::clog << "sqb: cannot write cache entry " << path << '\n';
      return;
    }
    out << doc.dump();
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) std::clog << "sqb: cannot write cache entry " << path << ": " << ec.message() << '\n';
}

std::string format_double(double x) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

}  // namespace

void RunConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("--alpha must be > 0");
  if (eta && (!(*eta >= 0.0) || !std::isfinite(*eta))) throw InputError("--eta must be >= 0");
  if (!(gamma_mu >= 0.0) || !(gamma_sigma >= 0.0)) throw InputError("growth rates must be >= 0");
  if (solver_iters < 1) throw InputError("--solver-iters must be >= 1");
  if (b1_mu < 1 || b1_sigma < 1) throw InputError("initial batch sizes must be >= 1");
  if (cap_sigma < 1 || (cap_mu && *cap_mu < 1)) throw InputError("batch caps must be >= 1");
  if (!(passes >= 0.0) || !std::isfinite(passes)) throw InputError("--passes must be >= 0");
  if (!(split > 0.0 && split <= 1.0)) throw InputError("--split must lie in (0, 1]");
  if (!(cadence > 0.0)) throw InputError("cadence must be > 0");
}

SqbConfig RunConfig::optimizer_config(std::size_t train_size) const {
  SqbConfig config;
  config.step_size = alpha;
  config.eta = eta.value_or(1.0 / static_cast<double>(train_size));
  config.gradient_schedule = {b1_mu, gamma_mu, cap_mu ? cap_mu : std::optional<std::size_t>(train_size)};
  config.curvature_schedule = {b1_sigma, gamma_sigma, cap_sigma};
  config.solver_iters = solver_iters;
  config.solver = solver;
  config.max_effective_passes = passes;
  config.seed = seed;
  return config;
}

std::optional<std::filesystem::path> cache_dir_from_env() {
  const char* dir = std::getenv("SQB_CACHE_DIR");
  if (dir == nullptr || *dir == '\0') return std::nullopt;
  return std::filesystem::path(dir);
}

std::uint64_t dataset_hash(const LogLinearModel& model) {
  std::uint64_t h = kFnvOffset;
  fnv_mix(h, model.num_examples());
  fnv_mix(h, model.dim());
  for (std::size_t j = 0; j < model.num_examples(); ++j) {
    fnv_mix(h, model.observed_label(j));
    const std::size_t n = model.outcome_count(j);
    fnv_mix(h, n);
    for (std::size_t y = 0; y < n; ++y) {
      fnv_mix(h, std::bit_cast<std::uint64_t>(model.measure(j, y)));
      const FeatureView f = model.feature(j, y);
      fnv_mix(h, f.nnz());
      for (std::size_t i = 0; i < f.nnz(); ++i) {
        fnv_mix(h, static_cast<std::uint64_t>(f.indices[i]));
        fnv_mix(h, std::bit_cast<std::uint64_t>(f.values[i]));
      }
    }
  }
  return h;
}

ReferenceOptimum compute_reference_optimum(const LogLinearModel& model, double eta,
                                           const ReferenceOptions& options) {
  if (!(eta > 0.0)) throw InputError("reference optimum requires eta > 0");
  if (model.num_examples() == 0) throw InputError("reference optimum on an empty set");

  std::optional<std::filesystem::path> path;
  if (options.cache_dir) {
    path = cache_path(*options.cache_dir, dataset_hash(model), eta);
    if (auto cached = load_cached(*path, model.dim())) return *cached;
  }

  const Objective objective(model, eta);
  const std::size_t solver_iters = std::min<std::size_t>(model.dim(), kReferenceSolverCap);
  std::vector<std::size_t> all(model.num_examples());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;

  ReferenceOptimum out;
  out.theta = Vector::Zero(static_cast<Eigen::Index>(model.dim()));
  for (;;) {
    // On the full set the bound's mu is the exact data gradient.
    const BatchBound bound = bound_batch(model, all, out.theta, BoundParts::kFull);
    const Vector gradient = bound.mu + eta * out.theta;
    out.gradient_norm = gradient.norm();
    if (out.gradient_norm <= options.gradient_tolerance) break;
    if (out.iterations >= options.max_iterations) {
      throw ConvergenceError("reference optimum did not converge in " +
                             std::to_string(options.max_iterations) +
                             " iterations; gradient norm " + format_double(out.gradient_norm));
    }
    const CurvatureOperator op(bound.curvature, eta);
    const SolveReport report = solve(op, gradient, std::max<std::size_t>(solver_iters, 1));
    if (!report.solution.allFinite()) throw SolverError("reference optimum: non-finite step");
    out.theta -= report.solution;
    ++out.iterations;
  }
  out.cost = objective_value(objective, out.theta);
  if (path) store_cached(*path, out);
  return out;
}

std::vector<MetricsRow> run_benchmark(const RunOptions& options, const LogLinearModel& train,
                                      const LogLinearModel* test, const ReferenceOptimum& reference) {
  const Objective train_objective(train, options.config.eta);
  std::unique_ptr<Objective> test_objective;
  if (test != nullptr && test->num_examples() > 0) test_objective = std::make_unique<Objective>(*test, 0.0);

  std::vector<MetricsRow> rows;
  const auto record = [&](const Vector& theta, const OptimizerState& state, double seconds) {
    MetricsRow row;
    row.effective_passes = state.effective_passes(train.num_examples());
    row.wall_seconds = seconds;
    row.train_cost = objective_value(train_objective, theta);
    row.train_excess_cost = row.train_cost - reference.cost;
    if (test_objective) {
      row.test_cost = objective_value(*test_objective, theta);
      row.test_error = predict_error(*test, theta);
    } else {
      row.test_cost = std::numeric_limits<double>::quiet_NaN();
      row.test_error = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  };
  run(options, train, record);
  return rows;
}

std::vector<MetricsRow> run_experiment(const RunConfig& config) {
  config.validate();
  const RawDataset raw = load_libsvm(config.data_path);
  for (const auto& w : raw.warnings) std::clog << "sqb: " << config.data_path << ": " << w << '\n';
  const auto [train_raw, test_raw] = split(raw, {config.split, config.split_seed});
  const std::size_t dim = raw.dim();
  const LogisticInstance train = to_logistic(train_raw, dim, config.unit_norm);
  const LogisticInstance test = to_logistic(test_raw, dim, config.unit_norm);

  RunOptions options;
  options.method = config.method;
  options.config = config.optimizer_config(train.num_examples());
  options.cadence = config.cadence;

  ReferenceOptions ref_options;
  ref_options.cache_dir = cache_dir_from_env();
  const ReferenceOptimum reference =
      compute_reference_optimum(train, options.config.eta, ref_options);

  const auto rows = run_benchmark(options, train, &test, reference);
  if (config.out_path.empty()) {
    write_metrics_csv(std::cout, rows);
  } else {
    std::ofstream out(config.out_path);
    if (!out) throw InputError("cannot open output file " + config.out_path);
    write_metrics_csv(out, rows);
  }
  return rows;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    out << format_double(r.effective_passes) << ',' << format_double(r.wall_seconds) << ','
        << format_double(r.train_cost) << ',' << format_double(r.train_excess_cost) << ','
        << format_double(r.test_cost) << ',' << format_double(r.test_error) << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw ParseError("metrics CSV: missing or unexpected header");
  }
  std::vector<MetricsRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double fields[6];
    std::size_t count = 0;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      const std::string_view token =
          std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (count == 6) throw ParseError("metrics CSV line " + std::to_string(line_no) + ": too many columns");
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), fields[count]);
      if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
        throw ParseError("metrics CSV line " + std::to_string(line_no) + ": bad number '" +
                         std::string(token) + "'");
      }
      ++count;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (count != 6) throw ParseError("metrics CSV line " + std::to_string(line_no) + ": expected 6 columns");
    rows.push_back({fields[0], fields[1], fields[2], fields[3], fields[4], fields[5]});
  }
  return rows;
}

}  // namespace sqb
