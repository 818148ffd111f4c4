#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "alkit/error.hpp"
#include "alkit/models.hpp"
#include "alkit/pool.hpp"

namespace alkit {

struct ScoredCandidate {
  EntryId entry_id;
  double score;  // higher = query first
};

// Highest score wins; equal scores go to the lowest entry id.
inline EntryId select_argmax(std::span<const ScoredCandidate> candidates) {
  if (candidates.empty()) throw ExhaustedError("no candidates to choose from");
  const ScoredCandidate* best = &candidates.front();
  for (const auto& c : candidates) {
    if (c.score > best->score || (c.score == best->score && c.entry_id < best->entry_id)) {
      best = &c;
    }
  }
  return best->entry_id;
}

// An active learning algorithm bound to one pool. Construction subscribes
// on_update() to the pool; destruction unsubscribes, so the pool must
// outlive the strategy.
class QueryStrategy {
 public:
  explicit QueryStrategy(Pool& pool) : pool_(pool) {
    handle_ = pool_.on_update([this](const UpdateEvent& e) { on_update(e); });
  }
  virtual ~QueryStrategy() { pool_.remove_callback(handle_); }

  QueryStrategy(const QueryStrategy&) = delete;
  QueryStrategy& operator=(const QueryStrategy&) = delete;

  // Identifier of the unlabeled example to query next.
  virtual EntryId make_query() = 0;
  virtual std::string name() const = 0;

  Pool& pool() const noexcept { return pool_; }

 protected:
  virtual void on_update(const UpdateEvent&) {}

  void require_unlabeled() const {
    if (pool_.unlabeled_count() == 0) throw ExhaustedError("unlabeled pool is empty");
  }

  Pool& pool_;

 private:
  CallbackHandle handle_;
};

// Strategies that rank every unlabeled example by a score.
class ScoringStrategy : public QueryStrategy {
 public:
  using QueryStrategy::QueryStrategy;

  virtual std::vector<ScoredCandidate> score_candidates() = 0;

  EntryId make_query() override {
    require_unlabeled();
    if (pool_.unlabeled_count() == 1) return pool_.unlabeled_ids().front();
    const auto scored = score_candidates();
    return select_argmax(scored);
  }
};

// A model retrained on the pool's labeled view only when a pool update has
// made it stale.
class LazyModel {
 public:
  explicit LazyModel(std::unique_ptr<Model> model) : model_(std::move(model)) {}

  const Model& get(const Pool& pool) {
    if (stale_) {
      model_->train(pool);
      stale_ = false;
    }
    return *model_;
  }
  void invalidate() noexcept { stale_ = true; }
  bool stale() const noexcept { return stale_; }

 private:
  std::unique_ptr<Model> model_;
  bool stale_ = true;
};

inline Matrix unlabeled_matrix(const Pool& pool, std::span<const EntryId> ids) {
  return gather_rows(pool.feature_matrix(), ids);
}

}  // namespace alkit
