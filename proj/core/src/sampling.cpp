#include "sqb/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <string>
#include <unordered_set>

#include "sqb/errors.hpp"

namespace sqb {

void BatchSchedule::validate() const {
  if (initial < 1) throw InputError("batch schedule: initial size must be >= 1");
  if (!(growth >= 0.0) || !std::isfinite(growth)) {
    throw InputError("batch schedule: growth rate must be finite and >= 0");
  }
  if (cap && *cap < 1) throw InputError("batch schedule: cap must be >= 1");
}

std::size_t BatchSchedule::size_at(std::int64_t k) const {
  if (k < 1) throw InputError("batch schedule: iteration must be >= 1, got " + std::to_string(k));
  validate();
  const double grown = std::round(static_cast<double>(k - 1) * growth);
  double size = static_cast<double>(initial) + grown;
  if (cap) size = std::min(size, static_cast<double>(*cap));
  return static_cast<std::size_t>(size);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 RandomStreams::stream(StreamPurpose purpose, std::uint64_t iteration) const {
  std::uint64_t h = splitmix64(seed_);
  h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
  h = splitmix64(h ^ iteration);
  return std::mt19937_64(h);
}

std::vector<std::size_t> draw(std::mt19937_64& rng, std::size_t population, std::size_t size) {
  if (size < 1) throw InputError("draw: batch size must be >= 1");
  if (population < 1) throw InputError("draw: empty population");
  if (size > population) {
    std::clog << "sqb: batch size " << size << " exceeds population " << population
              << "; using the full set\n";
    size = population;
  }
  std::vector<std::size_t> out;
  if (size == population) {
    out.resize(population);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(size * 2);
  out.reserve(size);
  for (std::size_t j = population - size; j < population; ++j) {
    std::uniform_int_distribution<std::size_t> pick(0, j);
    const std::size_t t = pick(rng);
    const std::size_t value = chosen.insert(t).second ? t : j;
    if (value == j) chosen.insert(j);
    out.push_back(value);
  }
  std::sort(out.begin(), out.end());
  return out;
}

BatchDraw draw_batches(const RandomStreams& streams, std::uint64_t iteration,
                       std::size_t population, std::size_t gradient_size,
                       std::size_t curvature_size) {
  auto grad_rng = streams.stream(StreamPurpose::kGradientBatch, iteration);
  auto curv_rng = streams.stream(StreamPurpose::kCurvatureBatch, iteration);
  BatchDraw out;
  out.gradient_batch = draw(grad_rng, population, gradient_size);
  out.curvature_batch = draw(curv_rng, population, curvature_size);
  return out;
}

}  // namespace sqb
