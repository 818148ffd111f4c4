#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "alkit/strategy.hpp"

namespace alkit {

enum class UncertaintyMethod { LeastConfident, SmallestMargin, Entropy };

inline std::string to_string(UncertaintyMethod m) {
  switch (m) {
    case UncertaintyMethod::LeastConfident: return "lc";
    case UncertaintyMethod::SmallestMargin: return "sm";
    case UncertaintyMethod::Entropy: return "entropy";
  }
  return "entropy";
}

inline void check_probability_row(std::span<const double> p) {
  if (p.empty()) throw DomainError("empty probability row");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= -1e-12 && v <= 1.0 + 1e-12)) throw DomainError("probability outside [0, 1]");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("probability row does not sum to 1");
}

// Higher = more uncertain. The margin is negated to share that orientation.
inline double uncertainty_score(std::span<const double> p, UncertaintyMethod method) {
  check_probability_row(p);
  switch (method) {
    case UncertaintyMethod::LeastConfident: {
      double top = 0.0;
      for (double v : p) top = std::max(top, v);
      return 1.0 - top;
    }
    case UncertaintyMethod::SmallestMargin: {
      std::vector<double> top(p.begin(), p.end());
      top.push_back(0.0);  // single-class rows compare against 0
      std::partial_sort(top.begin(), top.begin() + 2, top.end(), std::greater<>());
      return -(top[0] - top[1]);
    }
    case UncertaintyMethod::Entropy: {
      double h = 0.0;
      for (double v : p) {
        if (v > 0) h -= v * std::log(v);
      }
      return h;
    }
  }
  return 0.0;
}

class UncertaintySampling final : public ScoringStrategy {
 public:
  explicit UncertaintySampling(Pool& pool,
                               UncertaintyMethod method = UncertaintyMethod::Entropy,
                               std::unique_ptr<Model> model = std::make_unique<LogisticRegression>())
      : ScoringStrategy(pool), method_(method), model_(std::move(model)) {}

  std::string name() const override { return "uncertainty"; }
  UncertaintyMethod method() const noexcept { return method_; }

  std::vector<ScoredCandidate> score_candidates() override {
    require_unlabeled();
    const Model& model = model_.get(pool_);
    const auto ids = pool_.unlabeled_ids();
    const Matrix proba = model.predict_proba(unlabeled_matrix(pool_, ids));
    std::vector<ScoredCandidate> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      out[i] = {ids[i], uncertainty_score(proba.row(i), method_)};
    }
    return out;
  }

  const Model& model() { return model_.get(pool_); }

 protected:
  void on_update(const UpdateEvent&) override { model_.invalidate(); }

 private:
  UncertaintyMethod method_;
  LazyModel model_;
};

}  // namespace alkit
