#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "alkit/random.hpp"
#include "alkit/uncertainty.hpp"

namespace alkit {

// Median of the pairwise Euclidean distances among `points`; 1.0 when the
// median is zero or there is no pair.
inline double median_pairwise_distance(const Matrix& points) {
  std::vector<double> d;
  d.reserve(points.rows() * (points.rows() - (points.rows() > 0)) / 2);
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t j = i + 1; j < points.rows(); ++j) {
      d.push_back(std::sqrt(squared_distance(points.row(i), points.row(j))));
    }
  }
  if (d.empty()) return 1.0;
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  const double median = n % 2 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
  return median > 0 ? median : 1.0;
}

// Density-weighted uncertainty sampling: entropy uncertainty times a
// Gaussian-kernel density over the unlabeled pool, so isolated outliers are
// ranked below equally uncertain points in dense regions.
//
// The density cache is computed once, against the unlabeled set present at
// construction.
class DensityWeightedUncertaintySampling final : public ScoringStrategy {
 public:
  static constexpr std::size_t kDefaultBandwidthSample = 500;

  DensityWeightedUncertaintySampling(
      Pool& pool, std::uint64_t seed,
      std::unique_ptr<Model> model = std::make_unique<LogisticRegression>(),
      std::size_t bandwidth_sample = kDefaultBandwidthSample)
      : ScoringStrategy(pool), model_(std::move(model)) {
    auto reference = pool_.unlabeled_ids();
    auto sample = reference;
    if (sample.size() > bandwidth_sample) {
      Rng rng(seed);
      rng.shuffle(sample);
      sample.resize(bandwidth_sample);
      std::sort(sample.begin(), sample.end());
    }
    sigma_ = median_pairwise_distance(unlabeled_matrix(pool_, sample));

    const double denom = 2.0 * sigma_ * sigma_;
    density_.assign(pool_.size(), 0.0);
    for (EntryId i = 0; i < pool_.size(); ++i) {
      double total = 0.0;
      for (EntryId u : reference) {
        total += std::exp(-squared_distance(pool_.features(i), pool_.features(u)) / denom);
      }
      density_[i] = reference.empty() ? 1.0 : total / static_cast<double>(reference.size());
    }
  }

  std::string name() const override { return "dwus"; }

  double sigma() const noexcept { return sigma_; }
  double density(EntryId id) const { return density_.at(id); }

  std::vector<ScoredCandidate> score_candidates() override {
    require_unlabeled();
    const Model& model = model_.get(pool_);
    const auto ids = pool_.unlabeled_ids();
    const Matrix proba = model.predict_proba(unlabeled_matrix(pool_, ids));
    std::vector<ScoredCandidate> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const double u = uncertainty_score(proba.row(i), UncertaintyMethod::Entropy);
      out[i] = {ids[i], u * density_[ids[i]]};
    }
    return out;
  }

 protected:
  void on_update(const UpdateEvent&) override { model_.invalidate(); }

 private:
  LazyModel model_;
  double sigma_ = 1.0;
  std::vector<double> density_;
};

}  // namespace alkit
