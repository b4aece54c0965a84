#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sqb/model.hpp"

namespace sqb {

using SparseRow = std::vector<std::pair<int, double>>;  // (0-based index, value)

/// Binary-labelled sparse rows as read from a LIBSVM file. Labels are already
/// mapped to {0, 1}; feature indices are 0-based and ascending within a row.
struct RawDataset {
  std::vector<std::uint8_t> labels;
  std::vector<SparseRow> rows;
  std::optional<std::size_t> declared_dim;
  std::vector<std::string> warnings;

  std::size_t size() const { return rows.size(); }
  /// declared_dim if set, otherwise one past the largest index seen.
  std::size_t dim() const;
};

/// Parses "label idx:val idx:val ..." lines (1-based indices). Accepts label
/// sets {-1,+1}, {0,1} and {1,2}; blank lines and '#' comments are skipped.
/// Malformed lines raise ParseError naming every offending line number.
/// Out-of-order or repeated indices only produce a warning.
RawDataset parse_libsvm(std::istream& in, std::optional<std::size_t> declared_dim = std::nullopt);

/// Reads a file, decompressing it first when the name ends in ".gz".
RawDataset load_libsvm(const std::string& path,
                       std::optional<std::size_t> declared_dim = std::nullopt);

/// Writes labels as -1/+1 and values with round-trip precision.
void write_libsvm(std::ostream& out, const RawDataset& data);

struct SplitSpec {
  double train_fraction = 0.9;
  std::uint64_t shuffle_seed = 0;
};

/// Seeded shuffle, then the first floor(fraction * T) rows go to training and
/// the rest to testing. Both halves keep the parent's dimension.
std::pair<RawDataset, RawDataset> split(const RawDataset& data, const SplitSpec& spec);

/// Uniform random subset of `count` rows (all rows when count >= size).
RawDataset subsample(const RawDataset& data, std::size_t count, std::uint64_t seed);

/// Builds a logistic model over `dim` features. With unit_norm every nonzero
/// row is scaled to Euclidean norm one.
LogisticInstance to_logistic(const RawDataset& data, std::size_t dim, bool unit_norm = false);

}  // namespace sqb
