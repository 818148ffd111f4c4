#pragma once

#include <algorithm>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "alkit/error.hpp"
#include "alkit/pool.hpp"

namespace alkit {

// The oracle. Implementations return a class id for the queried example;
// simulated oracles use the id, human-facing ones show the features.
class Labeler {
 public:
  virtual ~Labeler() = default;
  virtual ClassId label(EntryId id, std::span<const double> features) = 0;
};

// Answers from a fully labeled copy of the data.
class IdealLabeler final : public Labeler {
 public:
  explicit IdealLabeler(std::vector<ClassId> truth) : truth_(std::move(truth)) {}

  ClassId label(EntryId id) const {
    if (id >= truth_.size()) {
      throw NotFoundError("entry " + std::to_string(id) + " outside ground truth of size " +
                          std::to_string(truth_.size()));
    }
    return truth_[id];
  }
  ClassId label(EntryId id, std::span<const double>) override { return label(id); }

 private:
  std::vector<ClassId> truth_;
};

struct DisplayHint {
  std::optional<std::pair<std::size_t, std::size_t>> image_shape;  // rows, cols
  std::vector<std::string> feature_names;
};

// Feature table, or an ASCII shade image when the hint carries a shape that
// matches the feature count.
inline void render_features(std::ostream& out, std::span<const double> features,
                            const DisplayHint& hint) {
  if (hint.image_shape && hint.image_shape->first * hint.image_shape->second == features.size()) {
    static constexpr char kRamp[] = " .:-=+*#%@";
    const auto [lo, hi] = std::minmax_element(features.begin(), features.end());
    const double range = *hi - *lo;
    const auto [rows, cols] = *hint.image_shape;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double v = range > 0 ? (features[r * cols + c] - *lo) / range : 0.0;
        out << kRamp[static_cast<std::size_t>(v * 9.0 + 0.5)];
      }
      out << '\n';
    }
    return;
  }
  for (std::size_t j = 0; j < features.size(); ++j) {
    const std::string name = j < hint.feature_names.size() ? hint.feature_names[j]
                                                           : "f" + std::to_string(j + 1);
    char value[32];
    std::snprintf(value, sizeof value, "%g", features[j]);
    out << "  " << name << std::string(name.size() < 12 ? 12 - name.size() : 1, ' ') << value
        << '\n';
  }
}

// Shows the example on a terminal and reads label tokens until one is valid.
class TerminalLabeler final : public Labeler {
 public:
  TerminalLabeler(std::istream& in, std::ostream& out, std::vector<std::string> tokens,
                  DisplayHint hint = {})
      : in_(in), out_(out), tokens_(std::move(tokens)), hint_(std::move(hint)) {}

  ClassId label(EntryId id, std::span<const double> features) override {
    out_ << "example " << id << ":\n";
    render_features(out_, features, hint_);
    for (;;) {
      out_ << "label [";
      for (std::size_t i = 0; i < tokens_.size(); ++i) out_ << (i ? "/" : "") << tokens_[i];
      out_ << "]: " << std::flush;
      std::string line;
      if (!std::getline(in_, line)) throw AbortedSessionError("input closed while labeling");
      const auto first = line.find_first_not_of(" \t\r");
      const auto last = line.find_last_not_of(" \t\r");
      const std::string token =
          first == std::string::npos ? "" : line.substr(first, last - first + 1);
      const auto it = std::find(tokens_.begin(), tokens_.end(), token);
      if (it != tokens_.end()) return static_cast<ClassId>(it - tokens_.begin());
      out_ << "invalid label '" << token << "'\n";
      ++reprompts_;
    }
  }

  std::size_t reprompts() const noexcept { return reprompts_; }

 private:
  std::istream& in_;
  std::ostream& out_;
  std::vector<std::string> tokens_;
  DisplayHint hint_;
  std::size_t reprompts_ = 0;
};

}  // namespace alkit
