#include "sqb/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string_view>

#include <zlib.h>

#include "sqb/errors.hpp"

namespace sqb {

namespace {

constexpr std::size_t kMaxReportedErrors = 10;

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  if (token.empty()) return false;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size() && std::isfinite(out);
}

bool parse_index(std::string_view token, long long& out) {
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

// Maps the observed raw label values onto {0, 1}.
std::uint8_t map_label(double raw, const std::set<double>& seen) {
  const auto subset_of = [&](std::initializer_list<double> allowed) {
    return std::all_of(seen.begin(), seen.end(), [&](double v) {
      return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
    });
  };
  if (subset_of({0.0, 1.0})) return raw == 1.0 ? 1 : 0;
  if (subset_of({-1.0, 1.0})) return raw == 1.0 ? 1 : 0;
  if (subset_of({1.0, 2.0})) return raw == 2.0 ? 1 : 0;
  throw ParseError("unsupported label set; expected {-1,+1}, {0,1} or {1,2}");
}

std::string read_gzip(const std::string& path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw ParseError("cannot open " + path);
  std::string content;
  char buffer[1 << 16];
  int n = 0;
  while ((n = gzread(file, buffer, sizeof(buffer))) > 0) content.append(buffer, static_cast<std::size_t>(n));
  const bool failed = n < 0;
  gzclose(file);
  if (failed) throw ParseError("gzip decompression failed for " + path);
  return content;
}

}  // namespace

std::size_t RawDataset::dim() const {
  if (declared_dim) return *declared_dim;
  std::size_t d = 0;
  for (const auto& row : rows) {
    for (const auto& [index, value] : row) d = std::max(d, static_cast<std::size_t>(index) + 1);
  }
  return d;
}

RawDataset parse_libsvm(std::istream& in, std::optional<std::size_t> declared_dim) {
  RawDataset out;
  out.declared_dim = declared_dim;
  std::vector<double> raw_labels;
  std::set<double> seen_labels;
  std::vector<std::string> errors;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    const auto tokens = split_whitespace(view);
    if (tokens.empty()) continue;

    const auto fail = [&](const std::string& what) {
      errors.push_back("line " + std::to_string(line_no) + ": " + what);
    };
    double label = 0.0;
    if (!parse_double(tokens[0], label)) {
      fail("non-numeric label '" + std::string(tokens[0]) + "'");
      continue;
    }

    SparseRow row;
    bool ok = true;
    bool ordered = true;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto colon = tokens[t].find(':');
      long long index = 0;
      double value = 0.0;
      if (colon == std::string_view::npos || !parse_index(tokens[t].substr(0, colon), index) ||
          !parse_double(tokens[t].substr(colon + 1), value)) {
        fail("malformed feature '" + std::string(tokens[t]) + "'");
        ok = false;
        break;
      }
      if (index < 1) {
        fail("feature index " + std::to_string(index) + " must be >= 1");
        ok = false;
        break;
      }
      if (declared_dim && static_cast<std::size_t>(index) > *declared_dim) {
        fail("feature index " + std::to_string(index) + " exceeds declared dimension");
        ok = false;
        break;
      }
      if (!row.empty() && index - 1 <= row.back().first) ordered = false;
      row.emplace_back(static_cast<int>(index - 1), value);
    }
    if (!ok) continue;

    if (!ordered) {
      out.warnings.push_back("line " + std::to_string(line_no) +
                             ": feature indices not increasing; sorted, last duplicate kept");
      std::stable_sort(row.begin(), row.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      SparseRow dedup;
      for (const auto& entry : row) {
        if (!dedup.empty() && dedup.back().first == entry.first) {
          dedup.back().second = entry.second;
        } else {
          dedup.push_back(entry);
        }
      }
      row = std::move(dedup);
    }
    raw_labels.push_back(label);
    seen_labels.insert(label);
    out.rows.push_back(std::move(row));
  }

  if (!errors.empty()) {
    std::ostringstream msg;
    msg << errors.size() << " malformed line(s):";
    for (std::size_t i = 0; i < std::min(errors.size(), kMaxReportedErrors); ++i) msg << "\n  " << errors[i];
    if (errors.size() > kMaxReportedErrors) msg << "\n  ...";
    throw ParseError(msg.str());
  }
  if (out.rows.empty()) throw ParseError("no data rows");

  out.labels.reserve(raw_labels.size());
  for (double raw : raw_labels) out.labels.push_back(map_label(raw, seen_labels));
  return out;
}

RawDataset load_libsvm(const std::string& path, std::optional<std::size_t> declared_dim) {
  const bool gz = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
  if (gz) {
    std::istringstream in(read_gzip(path));
    return parse_libsvm(in, declared_dim);
  }
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return parse_libsvm(in, declared_dim);
}

void write_libsvm(std::ostream& out, const RawDataset& data) {
  char buffer[64];
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << (data.labels[i] == 1 ? "+1" : "-1");
    for (const auto& [index, value] : data.rows[i]) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", value);
      out << ' ' << index + 1 << ':' << buffer;
    }
    out << '\n';
  }
}

std::pair<RawDataset, RawDataset> split(const RawDataset& data, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0)) {
    throw InputError("train fraction must lie in (0, 1]");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(spec.shuffle_seed);
  std::shuffle(order.begin(), order.end(), rng);

  const auto train_count = static_cast<std::size_t>(
      std::floor(spec.train_fraction * static_cast<double>(data.size()) + 1e-9));
  const std::size_t dim = data.dim();
  std::pair<RawDataset, RawDataset> out;
  out.first.declared_dim = dim;
  out.second.declared_dim = dim;
  for (std::size_t i = 0; i < order.size(); ++i) {
    RawDataset& part = i < train_count ? out.first : out.second;
    part.labels.push_back(data.labels[order[i]]);
    part.rows.push_back(data.rows[order[i]]);
  }
  return out;
}

RawDataset subsample(const RawDataset& data, std::size_t count, std::uint64_t seed) {
  if (count >= data.size()) return data;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(count);
  std::sort(order.begin(), order.end());
  RawDataset out;
  out.declared_dim = data.dim();
  for (std::size_t i : order) {
    out.labels.push_back(data.labels[i]);
    out.rows.push_back(data.rows[i]);
  }
  return out;
}

LogisticInstance to_logistic(const RawDataset& data, std::size_t dim, bool unit_norm) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double scale = 1.0;
    if (unit_norm) {
      double sq = 0.0;
      for (const auto& [index, value] : data.rows[i]) sq += value * value;
      if (sq > 0.0) scale = 1.0 / std::sqrt(sq);
    }
    for (const auto& [index, value] : data.rows[i]) {
      if (static_cast<std::size_t>(index) >= dim) {
        throw InputError("feature index " + std::to_string(index + 1) + " exceeds dimension " +
                         std::to_string(dim));
      }
      if (value != 0.0) triplets.emplace_back(static_cast<int>(i), index, value * scale);
    }
  }
  SparseRowMatrix features(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(dim));
  features.setFromTriplets(triplets.begin(), triplets.end());
  return LogisticInstance(std::move(features), data.labels);
}

}  // namespace sqb
