#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alkit/random.hpp"
#include "alkit/strategy.hpp"

namespace alkit {

// Query distribution over the unlabeled pool (positions 0..n_unlabeled-1):
//   q(i) = (1 - delta) * sum_j (w_j / sum w) * [advice_j == i] + delta / n_unlabeled
inline std::vector<double> albl_mixture(std::span<const double> weights,
                                        std::span<const std::size_t> advice,
                                        std::size_t n_unlabeled, double delta) {
  if (n_unlabeled == 0) throw ExhaustedError("unlabeled pool is empty");
  std::vector<double> q(n_unlabeled, delta / static_cast<double>(n_unlabeled));
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (std::size_t j = 0; j < weights.size(); ++j) {
    q.at(advice[j]) += (1.0 - delta) * weights[j] / total;
  }
  return q;
}

struct AlblReward {
  double raw = 0.0;         // 1 if the retrained model labels the query correctly
  double normalized = 0.0;  // importance-weighted, scaled into [0, 1]
};

// Importance-weighted reward r_raw / q(chosen), clipped at 1 / q_min and
// multiplied by q_min = delta / |U|.
inline AlblReward albl_reward(bool correct, double q_chosen, double delta,
                              std::size_t n_unlabeled) {
  AlblReward r;
  r.raw = correct ? 1.0 : 0.0;
  const double q_min = delta / static_cast<double>(n_unlabeled);
  if (q_min <= 0.0) {
    r.normalized = r.raw;
    return r;
  }
  const double r_hat = std::min(r.raw / q_chosen, 1.0 / q_min);
  r.normalized = r_hat * q_min;
  return r;
}

// Exponential update for the candidates whose advice was the chosen example,
// then renormalization so the weights sum to K.
inline void albl_update_weights(std::vector<double>& weights, const std::vector<bool>& advised,
                                double normalized_reward, double delta) {
  const double k = static_cast<double>(weights.size());
  const double factor = std::exp(delta * normalized_reward / k);
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (advised[j]) weights[j] *= factor;
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w *= k / total;
}

struct AlblParams {
  double delta = 0.1;
  std::uint64_t seed = 0;
};

struct AlblSnapshot {
  std::vector<std::string> candidates;
  std::vector<double> weights;
  std::vector<std::size_t> selection_counts;
  double cumulative_reward = 0.0;
  std::size_t queries = 0;
};

struct AlblRound {
  EntryId chosen = 0;
  std::size_t n_unlabeled = 0;
  std::vector<double> distribution;  // over the unlabeled ids at query time
  std::vector<EntryId> unlabeled;    // ids matching `distribution`
  std::vector<EntryId> advice;       // one id per candidate
  std::size_t credited = 0;          // candidate the query is attributed to
  std::optional<AlblReward> reward;  // set once the label arrives
  std::vector<double> weights_after;
};

// Active learning by learning: candidate strategies act as experts whose
// one-hot advice is mixed by their weights, floored by delta / |U|, and
// reweighted by the importance-weighted correctness of a reward model
// retrained after each label.
class ActiveLearningByLearning final : public QueryStrategy {
 public:
  ActiveLearningByLearning(
      Pool& pool, std::vector<std::unique_ptr<QueryStrategy>> candidates, AlblParams params = {},
      std::unique_ptr<Model> reward_model = std::make_unique<LogisticRegression>())
      : QueryStrategy(pool),
        candidates_(std::move(candidates)),
        params_(params),
        rng_(params.seed),
        reward_model_(std::move(reward_model)) {
    if (candidates_.empty()) throw DomainError("ALBL needs at least one candidate");
    if (!(params_.delta >= 0.0 && params_.delta <= 1.0)) {
      throw DomainError("ALBL delta must lie in [0, 1]");
    }
    for (const auto& c : candidates_) {
      if (&c->pool() != &pool) throw DomainError("ALBL candidates must share the pool");
    }
    weights_.assign(candidates_.size(), 1.0);
    counts_.assign(candidates_.size(), 0);
  }

  std::string name() const override { return "albl"; }

  EntryId make_query() override {
    require_unlabeled();
    const auto ids = pool_.unlabeled_ids();
    AlblRound round;
    round.n_unlabeled = ids.size();
    std::vector<std::size_t> positions(candidates_.size());
    for (std::size_t j = 0; j < candidates_.size(); ++j) {
      const EntryId advice = candidates_[j]->make_query();
      const auto it = std::lower_bound(ids.begin(), ids.end(), advice);
      if (it == ids.end() || *it != advice) {
        throw ProtocolError("candidate " + candidates_[j]->name() + " advised a labeled entry");
      }
      positions[j] = static_cast<std::size_t>(it - ids.begin());
      round.advice.push_back(advice);
    }
    round.distribution = albl_mixture(weights_, positions, ids.size(), params_.delta);

    const double u = rng_.uniform01();
    std::size_t pick = ids.size() - 1;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      cumulative += round.distribution[i];
      if (u < cumulative) {
        pick = i;
        break;
      }
    }
    while (round.distribution[pick] <= 0.0 && pick > 0) --pick;
    round.chosen = ids[pick];

    // Attribute the query to the candidate contributing most of q(chosen).
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    const double k = static_cast<double>(candidates_.size());
    double best = -1.0;
    for (std::size_t j = 0; j < candidates_.size(); ++j) {
      const double share = (1.0 - params_.delta) * weights_[j] / total *
                               (positions[j] == pick ? 1.0 : 0.0) +
                           params_.delta / (static_cast<double>(ids.size()) * k);
      if (share > best) {
        best = share;
        round.credited = j;
      }
    }
    ++counts_[round.credited];
    round.unlabeled = ids;
    rounds_.push_back(std::move(round));
    pending_ = true;
    return rounds_.back().chosen;
  }

  AlblSnapshot snapshot() const {
    AlblSnapshot s;
    for (const auto& c : candidates_) s.candidates.push_back(c->name());
    s.weights = weights_;
    s.selection_counts = counts_;
    s.cumulative_reward = cumulative_reward_;
    s.queries = rounds_.size();
    return s;
  }

  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<AlblRound>& rounds() const noexcept { return rounds_; }
  double delta() const noexcept { return params_.delta; }
  std::size_t num_candidates() const noexcept { return candidates_.size(); }
  const QueryStrategy& candidate(std::size_t j) const { return *candidates_.at(j); }

 protected:
  void on_update(const UpdateEvent& event) override {
    if (!pending_) return;
    AlblRound& round = rounds_.back();
    if (event.entry_id != round.chosen) {
      throw ProtocolError("update for entry " + std::to_string(event.entry_id) +
                          " while ALBL awaits entry " + std::to_string(round.chosen));
    }
    pending_ = false;

    reward_model_->train(pool_);
    Matrix x(1, pool_.dimensionality());
    const auto f = pool_.features(event.entry_id);
    std::copy(f.begin(), f.end(), x.row_mut(0).begin());
    const bool correct = reward_model_->predict(x).front() == event.label;

    const auto pos = static_cast<std::size_t>(
        std::lower_bound(round.unlabeled.begin(), round.unlabeled.end(), round.chosen) -
        round.unlabeled.begin());
    const AlblReward reward =
        albl_reward(correct, round.distribution[pos], params_.delta, round.n_unlabeled);
    std::vector<bool> advised(candidates_.size());
    for (std::size_t j = 0; j < candidates_.size(); ++j) {
      advised[j] = round.advice[j] == round.chosen;
    }
    albl_update_weights(weights_, advised, reward.normalized, params_.delta);
    cumulative_reward_ += reward.normalized;
    round.reward = reward;
    round.weights_after = weights_;
  }

 private:
  std::vector<std::unique_ptr<QueryStrategy>> candidates_;
  AlblParams params_;
  Rng rng_;
  std::unique_ptr<Model> reward_model_;
  std::vector<double> weights_;
  std::vector<std::size_t> counts_;
  std::vector<AlblRound> rounds_;
  double cumulative_reward_ = 0.0;
  bool pending_ = false;
};

}  // namespace alkit
