#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "alkit/error.hpp"
#include "alkit/matrix.hpp"
#include "alkit/pool.hpp"
#include "alkit/random.hpp"

namespace alkit {

// A fully labeled dataset. class_table[id] is the label token as it appeared
// in the source file.
struct RawDataset {
  Matrix features;
  std::vector<ClassId> labels;
  std::vector<std::string> class_table;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dimensionality() const noexcept { return features.cols(); }
  std::size_t num_classes() const noexcept { return class_table.size(); }

  std::optional<ClassId> class_of(std::string_view token) const {
    for (std::size_t i = 0; i < class_table.size(); ++i) {
      if (class_table[i] == token) return static_cast<ClassId>(i);
    }
    return std::nullopt;
  }
};

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

inline bool parse_index(std::string_view s, std::size_t& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

// Parses `label idx:val ...` lines. Indices are 1-based and strictly
// increasing within a line; absent indices are zero. Anything after '#' is a
// comment. Label tokens become class ids in order of first appearance.
inline RawDataset parse_libsvm(std::istream& in) {
  struct Row {
    std::size_t label;
    std::vector<std::pair<std::size_t, double>> values;
  };
  std::vector<Row> rows;
  std::vector<std::string> tokens;
  std::unordered_map<std::string, std::size_t> token_ids;
  std::size_t width = 0;
  std::size_t line_no = 0;
  std::string line;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    const auto fields = detail::split_ws(view);
    if (fields.empty()) continue;

    double numeric_label = 0;
    if (!detail::parse_double(fields[0], numeric_label)) {
      throw ParseError(line_no, "label '" + std::string(fields[0]) + "' is not numeric");
    }
    const std::string token(fields[0]);
    auto [it, inserted] = token_ids.emplace(token, tokens.size());
    if (inserted) tokens.push_back(token);

    Row row{it->second, {}};
    std::size_t previous = 0;
    for (std::size_t f = 1; f < fields.size(); ++f) {
      const auto pair = fields[f];
      const auto colon = pair.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, "malformed pair '" + std::string(pair) + "'");
      }
      std::size_t index = 0;
      if (!detail::parse_index(pair.substr(0, colon), index) || index == 0) {
        throw ParseError(line_no, "bad feature index in '" + std::string(pair) + "'");
      }
      double value = 0;
      if (!detail::parse_double(pair.substr(colon + 1), value)) {
        throw ParseError(line_no, "non-numeric value in '" + std::string(pair) + "'");
      }
      if (index <= previous) {
        throw ParseError(line_no, "feature indices must be strictly increasing (" +
                                      std::to_string(index) + " after " +
                                      std::to_string(previous) + ")");
      }
      previous = index;
      width = std::max(width, index);
      row.values.emplace_back(index, value);
    }
    rows.push_back(std::move(row));
  }

  if (rows.empty()) throw ParseError(std::max<std::size_t>(line_no, 1), "no examples in input");
  if (width == 0) throw ParseError(line_no, "no features in input");

  RawDataset out;
  out.features = Matrix(rows.size(), width);
  out.labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [index, value] : rows[r].values) out.features(r, index - 1) = value;
    out.labels.push_back(static_cast<ClassId>(rows[r].label));
  }
  out.class_table = std::move(tokens);
  return out;
}

inline RawDataset parse_libsvm(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_libsvm(in);
}

inline RawDataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open dataset '" + path + "'");
  return parse_libsvm(in);
}

// Canonical form: original label token, then the nonzero features with
// shortest round-trip formatting.
inline void write_libsvm(std::ostream& out, const RawDataset& data) {
  for (std::size_t r = 0; r < data.size(); ++r) {
    out << data.class_table.at(static_cast<std::size_t>(data.labels[r]));
    const auto row = data.features.row(r);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] != 0.0) out << ' ' << (j + 1) << ':' << detail::format_double(row[j]);
    }
    out << '\n';
  }
}

inline RawDataset subset(const RawDataset& data, std::span<const std::size_t> rows) {
  RawDataset out;
  out.features = gather_rows(data.features, rows);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(data.labels[r]);
  out.class_table = data.class_table;
  return out;
}

// Seeded shuffle, then the first round(n * test_fraction) rows form the test set.
inline std::pair<RawDataset, RawDataset> split(const RawDataset& data, double test_fraction,
                                               std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw SplitError("test fraction must lie in (0, 1)");
  }
  const std::size_t n = data.size();
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  if (n_test == 0 || n_test >= n) {
    throw SplitError("test fraction " + detail::format_double(test_fraction) + " on " +
                     std::to_string(n) + " rows leaves an empty part");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const std::vector<std::size_t> test_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  const std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  return {subset(data, train_rows), subset(data, test_rows)};
}

// Per-feature affine map of the fitted range onto [-1, 1]. Constant features
// map to 0.
class MinMaxScaler {
 public:
  static MinMaxScaler fit(const Matrix& x) {
    MinMaxScaler s;
    s.lo_.assign(x.cols(), 0.0);
    s.hi_.assign(x.cols(), 0.0);
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double lo = x.rows() ? x(0, j) : 0.0, hi = lo;
      for (std::size_t i = 1; i < x.rows(); ++i) {
        lo = std::min(lo, x(i, j));
        hi = std::max(hi, x(i, j));
      }
      s.lo_[j] = lo;
      s.hi_[j] = hi;
    }
    return s;
  }

  Matrix transform(const Matrix& x) const {
    if (x.cols() != lo_.size()) throw DimensionError("scaler fitted on a different width");
    Matrix out = x;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < x.cols(); ++j) {
        const double range = hi_[j] - lo_[j];
        out(i, j) = range > 0 ? 2.0 * (x(i, j) - lo_[j]) / range - 1.0 : 0.0;
      }
    }
    return out;
  }

 private:
  std::vector<double> lo_, hi_;
};

struct SeededPool {
  Pool pool;
  std::vector<ClassId> ground_truth;
};

inline constexpr int kMaxSeedingAttempts = 1000;

// Labels a seeded random subset of n_labeled rows, redrawn until it covers at
// least two classes. The full label sequence is returned for the oracle.
inline SeededPool seed_pool(const RawDataset& train, std::size_t n_labeled, std::uint64_t seed) {
  const std::size_t n = train.size();
  if (n_labeled < 2 || n_labeled > n) {
    throw SeedingError("n_labeled must lie in [2, " + std::to_string(n) + "], got " +
                       std::to_string(n_labeled));
  }
  const std::set<ClassId> present(train.labels.begin(), train.labels.end());
  if (present.size() < 2) throw SeedingError("training data contains a single class");

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  for (int attempt = 0; attempt < kMaxSeedingAttempts; ++attempt) {
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    // Partial Fisher-Yates: the first n_labeled slots are a uniform subset.
    for (std::size_t i = 0; i < n_labeled; ++i) {
      std::swap(order[i], order[i + rng.uniform_index(n - i)]);
    }
    const ClassId first = train.labels[order[0]];
    bool covered = false;
    for (std::size_t i = 1; i < n_labeled && !covered; ++i) {
      covered = train.labels[order[i]] != first;
    }
    if (!covered) continue;

    std::vector<std::optional<ClassId>> labels(n);
    for (std::size_t i = 0; i < n_labeled; ++i) labels[order[i]] = train.labels[order[i]];
    return {Pool(train.features, std::move(labels)), train.labels};
  }
  throw SeedingError("no labeled subset covering 2 classes after " +
                     std::to_string(kMaxSeedingAttempts) + " draws");
}

}  // namespace alkit
