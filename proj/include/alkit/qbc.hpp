#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "alkit/random.hpp"
#include "alkit/strategy.hpp"

namespace alkit {

// Entropy of the committee's vote distribution, summed over classes that
// received at least one vote (in ascending class order).
inline double qbc_vote_entropy(std::span<const ClassId> votes, std::size_t num_classes) {
  if (votes.empty()) throw EmptyInputError("vote entropy needs at least one vote");
  (void)num_classes;
  std::map<ClassId, std::size_t> counts;
  for (ClassId v : votes) ++counts[v];
  const double n = static_cast<double>(votes.size());
  double h = 0.0;
  for (const auto& [cls, count] : counts) {
    const double f = static_cast<double>(count) / n;
    h -= f * std::log(f);
  }
  return h;
}

// Query-by-committee: members are trained on bootstrap resamples of the
// labeled view and the example with the highest vote entropy is queried.
class QueryByCommittee final : public ScoringStrategy {
 public:
  static constexpr int kMaxResampleAttempts = 50;

  QueryByCommittee(Pool& pool, std::uint64_t seed, std::size_t committee_size = 4,
                   std::unique_ptr<Model> prototype = std::make_unique<LogisticRegression>())
      : ScoringStrategy(pool), rng_(seed), prototype_(std::move(prototype)) {
    if (committee_size == 0) throw DomainError("committee needs at least one member");
    members_.resize(committee_size);
  }

  std::string name() const override { return "qbc"; }

  void refresh_committee() {
    auto [x, y] = pool_.labeled_data();
    const auto classes = distinct_classes(y);
    fell_back_.assign(members_.size(), false);
    // With one example per class, every two-class resample is the full view
    // reordered; skip straight to the fallback.
    const bool one_per_class = y.size() == classes.size();
    for (std::size_t m = 0; m < members_.size(); ++m) {
      auto member = prototype_->clone();
      bool drawn = false;
      for (int attempt = 0; attempt < kMaxResampleAttempts && !drawn && !one_per_class;
           ++attempt) {
        std::vector<std::size_t> rows(y.size());
        std::vector<ClassId> labels(y.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
          rows[i] = rng_.uniform_index(y.size());
          labels[i] = y[rows[i]];
        }
        if (std::any_of(labels.begin(), labels.end(),
                        [&](ClassId l) { return l != labels.front(); })) {
          member->fit(gather_rows(x, rows), labels);
          drawn = true;
        }
      }
      if (!drawn) {
        member->fit(x, y);
        fell_back_[m] = true;
      }
      members_[m] = std::move(member);
    }
    num_classes_ = classes.size();
    stale_ = false;
  }

  const std::vector<std::unique_ptr<Model>>& committee() {
    if (stale_) refresh_committee();
    return members_;
  }
  // Which members were trained on the full labeled view after every
  // resample came out single-class.
  const std::vector<bool>& fell_back() const noexcept { return fell_back_; }

  std::vector<ScoredCandidate> score_candidates() override {
    require_unlabeled();
    committee();
    const auto ids = pool_.unlabeled_ids();
    const Matrix x = unlabeled_matrix(pool_, ids);
    std::vector<std::vector<ClassId>> predictions;
    predictions.reserve(members_.size());
    for (const auto& m : members_) predictions.push_back(m->predict(x));
    std::vector<ScoredCandidate> out(ids.size());
    std::vector<ClassId> votes(members_.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t m = 0; m < members_.size(); ++m) votes[m] = predictions[m][i];
      out[i] = {ids[i], qbc_vote_entropy(votes, num_classes_)};
    }
    return out;
  }

 protected:
  void on_update(const UpdateEvent&) override { stale_ = true; }

 private:
  Rng rng_;
  std::unique_ptr<Model> prototype_;
  std::vector<std::unique_ptr<Model>> members_;
  std::vector<bool> fell_back_;
  std::size_t num_classes_ = 0;
  bool stale_ = true;
};

}  // namespace alkit
