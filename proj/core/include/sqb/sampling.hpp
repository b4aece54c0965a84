#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace sqb {

/// Linear batch growth: b_k = min(cap, initial + round((k - 1) * growth)),
/// with round() taken half away from zero. An empty cap means unbounded.
struct BatchSchedule {
  std::size_t initial = 5;
  double growth = 0.0;
  std::optional<std::size_t> cap;

  void validate() const;
  std::size_t size_at(std::int64_t k) const;
};

/// Named random streams. Each (purpose, iteration) pair maps to its own
/// generator seeded from a splitmix64 mix of (seed, purpose, iteration), so
/// draws for different purposes never share state.
enum class StreamPurpose : std::uint64_t {
  kGradientBatch = 1,
  kCurvatureBatch = 2,
  kSgdExample = 3,
  kSagExample = 4,
};

class RandomStreams {
 public:
  explicit RandomStreams(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64 stream(StreamPurpose purpose, std::uint64_t iteration) const;

 private:
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform subset of {0, ..., population - 1} of the given size, drawn without
/// replacement (Floyd's algorithm) and returned in ascending order. A size
/// above the population is clamped to the full set.
std::vector<std::size_t> draw(std::mt19937_64& rng, std::size_t population, std::size_t size);

struct BatchDraw {
  std::vector<std::size_t> gradient_batch;
  std::vector<std::size_t> curvature_batch;
};

/// Gradient and curvature batches for one iteration, from independent streams.
BatchDraw draw_batches(const RandomStreams& streams, std::uint64_t iteration,
                       std::size_t population, std::size_t gradient_size,
                       std::size_t curvature_size);

}  // namespace sqb
