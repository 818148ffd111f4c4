#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "alkit/random.hpp"
#include "alkit/strategy.hpp"

namespace alkit {

struct ExpectedErrorReductionParams {
  std::size_t candidate_cap = 200;
  LogisticRegressionParams scratch{.l2 = 0.01, .max_epochs = 100, .step = 0.1,
                                   .gradient_tolerance = 1e-6};
};

// Expected error reduction with the 0/1-loss proxy
//   FutureErr(x, y) = sum over u in U \ {x} of (1 - max_y' P(y' | u))
// under a model retrained on labeled + {(x, y)}. The score is
// -sum_y P(y | x) FutureErr(x, y).
class ExpectedErrorReduction final : public ScoringStrategy {
 public:
  ExpectedErrorReduction(Pool& pool, std::uint64_t seed,
                         std::unique_ptr<Model> model = std::make_unique<LogisticRegression>(),
                         ExpectedErrorReductionParams params = {})
      : ScoringStrategy(pool), model_(std::move(model)), params_(params), rng_(seed) {}

  std::string name() const override { return "eer"; }

  double future_error(EntryId candidate, ClassId label) const {
    auto [x, y] = pool_.labeled_data();
    x.append_row(pool_.features(candidate));
    y.push_back(label);
    LogisticRegression scratch(params_.scratch);
    scratch.fit(x, y);

    std::vector<EntryId> rest;
    for (EntryId u : pool_.unlabeled_ids()) {
      if (u != candidate) rest.push_back(u);
    }
    if (rest.empty()) return 0.0;
    const Matrix proba = scratch.predict_proba(unlabeled_matrix(pool_, rest));
    double total = 0.0;
    for (std::size_t i = 0; i < proba.rows(); ++i) {
      const auto row = proba.row(i);
      total += 1.0 - *std::max_element(row.begin(), row.end());
    }
    return total;
  }

  std::vector<ScoredCandidate> score_candidates() override {
    require_unlabeled();
    const Model& model = model_.get(pool_);
    auto ids = pool_.unlabeled_ids();
    if (ids.size() > params_.candidate_cap) {
      rng_.shuffle(ids);
      ids.resize(params_.candidate_cap);
      std::sort(ids.begin(), ids.end());
    }
    const Matrix proba = model.predict_proba(unlabeled_matrix(pool_, ids));
    std::vector<ScoredCandidate> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      double expected = 0.0;
      for (std::size_t c = 0; c < model.classes().size(); ++c) {
        expected += proba(i, c) * future_error(ids[i], model.classes()[c]);
      }
      out[i] = {ids[i], -expected};
    }
    return out;
  }

 protected:
  void on_update(const UpdateEvent&) override { model_.invalidate(); }

 private:
  LazyModel model_;
  ExpectedErrorReductionParams params_;
  Rng rng_;
};

}  // namespace alkit
