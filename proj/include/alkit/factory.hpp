#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "alkit/albl.hpp"
#include "alkit/dwus.hpp"
#include "alkit/eer.hpp"
#include "alkit/qbc.hpp"
#include "alkit/random_sampling.hpp"
#include "alkit/uncertainty.hpp"

namespace alkit {

inline const std::vector<std::string>& strategy_names() {
  static const std::vector<std::string> names{"uncertainty", "random", "qbc", "dwus", "eer", "albl"};
  return names;
}

inline const std::vector<std::string>& default_albl_candidates() {
  static const std::vector<std::string> names{"uncertainty", "random", "qbc", "dwus"};
  return names;
}

// `name` or `albl[a|b|...]`. `text` is the spelling used in outputs.
struct StrategySpec {
  std::string name;
  std::vector<std::string> candidates;
  std::string text;
};

inline std::string valid_strategy_list() {
  std::string s;
  for (const auto& n : strategy_names()) s += (s.empty() ? "" : ", ") + n;
  return s + ", albl[c1|c2|...]";
}

inline StrategySpec parse_strategy_spec(std::string_view text) {
  StrategySpec spec;
  spec.text = std::string(text);
  const auto open = text.find('[');
  spec.name = std::string(text.substr(0, open));
  const auto& names = strategy_names();
  if (std::find(names.begin(), names.end(), spec.name) == names.end()) {
    throw UsageError("unknown strategy '" + std::string(text) + "' (valid: " +
                     valid_strategy_list() + ")");
  }
  if (open == std::string_view::npos) {
    if (spec.name == "albl") spec.candidates = default_albl_candidates();
    return spec;
  }
  if (spec.name != "albl" || text.back() != ']') {
    throw UsageError("malformed strategy '" + std::string(text) + "'");
  }
  std::string_view inner = text.substr(open + 1, text.size() - open - 2);
  while (true) {
    const auto bar = inner.find('|');
    const std::string cand(inner.substr(0, bar));
    if (cand.empty() || cand == "albl" ||
        std::find(names.begin(), names.end(), cand) == names.end()) {
      throw UsageError("invalid ALBL candidate '" + cand + "' in '" + std::string(text) + "'");
    }
    spec.candidates.push_back(cand);
    if (bar == std::string_view::npos) break;
    inner.remove_prefix(bar + 1);
  }
  return spec;
}

inline std::vector<StrategySpec> parse_strategy_list(std::string_view csv) {
  std::vector<StrategySpec> out;
  while (!csv.empty()) {
    const auto comma = csv.find(',');
    const auto item = csv.substr(0, comma);
    if (!item.empty()) {
      auto spec = parse_strategy_spec(item);
      for (const auto& seen : out) {
        if (seen.text == spec.text) throw UsageError("strategy '" + spec.text + "' listed twice");
      }
      out.push_back(std::move(spec));
    }
    if (comma == std::string_view::npos) break;
    csv.remove_prefix(comma + 1);
  }
  if (out.empty()) throw UsageError("no strategies given (valid: " + valid_strategy_list() + ")");
  return out;
}

// Uncertainty sampling follows the experiment's model; the strategies that
// need calibrated probabilities always use logistic regression.
inline std::unique_ptr<QueryStrategy> make_simple_strategy(const std::string& name, Pool& pool,
                                                           ModelKind model, std::uint64_t seed) {
  if (name == "uncertainty") {
    return std::make_unique<UncertaintySampling>(pool, UncertaintyMethod::Entropy,
                                                 make_model(model, derive_seed(seed, 1)));
  }
  if (name == "random") return std::make_unique<RandomSampling>(pool, derive_seed(seed, 2));
  if (name == "qbc") return std::make_unique<QueryByCommittee>(pool, derive_seed(seed, 3));
  if (name == "dwus") {
    return std::make_unique<DensityWeightedUncertaintySampling>(pool, derive_seed(seed, 4));
  }
  if (name == "eer") return std::make_unique<ExpectedErrorReduction>(pool, derive_seed(seed, 5));
  throw UsageError("unknown strategy '" + name + "'");
}

inline std::unique_ptr<QueryStrategy> make_strategy(const StrategySpec& spec, Pool& pool,
                                                    ModelKind model, std::uint64_t seed) {
  if (spec.name != "albl") return make_simple_strategy(spec.name, pool, model, seed);
  std::vector<std::unique_ptr<QueryStrategy>> candidates;
  for (std::size_t j = 0; j < spec.candidates.size(); ++j) {
    candidates.push_back(
        make_simple_strategy(spec.candidates[j], pool, model, derive_seed(seed, 100 + j)));
  }
  AlblParams params;
  params.seed = derive_seed(seed, 6);
  return std::make_unique<ActiveLearningByLearning>(pool, std::move(candidates), params);
}

}  // namespace alkit
