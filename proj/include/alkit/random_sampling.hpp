#pragma once

#include <cstdint>
#include <string>

#include "alkit/random.hpp"
#include "alkit/strategy.hpp"

namespace alkit {

// Uniform choice among the unlabeled examples; the baseline.
class RandomSampling final : public QueryStrategy {
 public:
  RandomSampling(Pool& pool, std::uint64_t seed) : QueryStrategy(pool), rng_(seed) {}

  std::string name() const override { return "random"; }

  EntryId make_query() override {
    require_unlabeled();
    const auto ids = pool_.unlabeled_ids();
    return ids[rng_.uniform_index(ids.size())];
  }

 private:
  Rng rng_;
};

}  // namespace alkit
