#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "alkit/factory.hpp"
#include "alkit/labelers.hpp"
#include "alkit/libsvm.hpp"

namespace alkit {

struct ExperimentConfig {
  std::string data_path;
  std::vector<StrategySpec> strategies;
  ModelKind model = ModelKind::LogisticRegression;
  std::size_t quota = 30;
  std::size_t trials = 1;
  double test_fraction = 0.33;
  std::size_t n_labeled = 10;
  std::uint64_t seed = 0;
  bool scale = false;
  std::string out_csv;
  std::string out_json;
  unsigned threads = 0;  // 0 = hardware concurrency
};

// Test error after 0..quota queries for one (strategy, trial).
struct LearningCurve {
  std::string strategy;
  std::size_t trial = 0;
  std::vector<double> error_rates;
};

struct AlblTrace {
  std::vector<std::string> candidates;
  std::vector<std::vector<double>> weights;  // after each query, K entries
  std::vector<std::size_t> selection_counts;
  double cumulative_reward = 0.0;
};

struct TrialResult {
  LearningCurve curve;
  std::optional<AlblTrace> albl;
};

struct RunRecord {
  ExperimentConfig config;
  std::vector<TrialResult> results;  // strategy-major, then trial
  std::vector<std::vector<double>> mean_curves;  // one per strategy
  bool valid = true;
  std::string error;
};

class TrialError : public Error {
 public:
  using Error::Error;
};

struct TrialData {
  RawDataset train;
  RawDataset test;
};

// Split and (optionally) scale for one trial; the same seed yields the same
// partition for every strategy.
inline TrialData prepare_trial_data(const RawDataset& data, double test_fraction, bool scale,
                                    std::uint64_t seed) {
  auto [train, test] = split(data, test_fraction, seed);
  if (scale) {
    const auto scaler = MinMaxScaler::fit(train.features);
    train.features = scaler.transform(train.features);
    test.features = scaler.transform(test.features);
  }
  return {std::move(train), std::move(test)};
}

// One run of the query / label / update / retrain loop.
inline TrialResult run_trial(const ExperimentConfig& config, const RawDataset& data,
                             const StrategySpec& spec, std::size_t trial) {
  const std::uint64_t seed = config.seed + trial;
  try {
    const TrialData td = prepare_trial_data(data, config.test_fraction, config.scale, seed);
    SeededPool seeded = seed_pool(td.train, config.n_labeled, seed);
    Pool& pool = seeded.pool;
    if (config.quota > pool.unlabeled_count()) {
      throw UsageError("quota " + std::to_string(config.quota) + " exceeds the " +
                       std::to_string(pool.unlabeled_count()) + " unlabeled examples");
    }
    IdealLabeler labeler(std::move(seeded.ground_truth));
    auto strategy = make_strategy(spec, pool, config.model, seed);
    auto model = make_model(config.model, derive_seed(seed, 7));

    TrialResult result;
    result.curve.strategy = spec.text;
    result.curve.trial = trial;
    result.curve.error_rates.reserve(config.quota + 1);
    model->train(pool);
    result.curve.error_rates.push_back(1.0 - model->score(td.test.features, td.test.labels));
    for (std::size_t q = 0; q < config.quota; ++q) {
      const EntryId id = strategy->make_query();
      const ClassId label = labeler.label(id, pool.features(id));
      pool.update(id, label);
      model->train(pool);
      result.curve.error_rates.push_back(1.0 - model->score(td.test.features, td.test.labels));
    }

    if (const auto* albl = dynamic_cast<const ActiveLearningByLearning*>(strategy.get())) {
      const auto snap = albl->snapshot();
      AlblTrace trace;
      trace.candidates = snap.candidates;
      trace.selection_counts = snap.selection_counts;
      trace.cumulative_reward = snap.cumulative_reward;
      for (const auto& round : albl->rounds()) trace.weights.push_back(round.weights_after);
      result.albl = std::move(trace);
    }
    return result;
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw TrialError("strategy " + spec.text + " trial " + std::to_string(trial) + ": " +
                     e.what());
  }
}

inline std::string format_fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline void write_csv(std::ostream& out, const std::vector<TrialResult>& results) {
  out << "strategy,trial,query_index,error_rate\n";
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.curve.error_rates.size(); ++i) {
      out << r.curve.strategy << ',' << r.curve.trial << ',' << i << ','
          << format_fixed6(r.curve.error_rates[i]) << '\n';
    }
  }
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json strategies = nlohmann::json::array();
  for (const auto& s : c.strategies) strategies.push_back(s.text);
  return {{"data", c.data_path},       {"strategies", strategies},
          {"model", to_string(c.model)}, {"quota", c.quota},
          {"trials", c.trials},         {"test_fraction", c.test_fraction},
          {"n_labeled", c.n_labeled},   {"seed", c.seed},
          {"scale", c.scale}};
}

inline nlohmann::json to_json(const RunRecord& record) {
  using nlohmann::json;
  json j;
  j["valid"] = record.valid;
  if (!record.valid) j["error"] = record.error;
  j["created_at"] = std::chrono::duration_cast<std::chrono::seconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count();
  j["config"] = to_json(record.config);
  json strategies = json::array();
  for (std::size_t s = 0; s < record.mean_curves.size(); ++s) {
    strategies.push_back({{"strategy", record.config.strategies[s].text},
                          {"mean_curve", record.mean_curves[s]}});
  }
  j["strategies"] = strategies;
  json curves = json::array();
  json albl = json::array();
  for (const auto& r : record.results) {
    curves.push_back({{"strategy", r.curve.strategy},
                      {"trial", r.curve.trial},
                      {"error_rates", r.curve.error_rates}});
    if (r.albl) {
      albl.push_back({{"strategy", r.curve.strategy},
                      {"trial", r.curve.trial},
                      {"candidates", r.albl->candidates},
                      {"weights", r.albl->weights},
                      {"selection_counts", r.albl->selection_counts},
                      {"cumulative_reward", r.albl->cumulative_reward}});
    }
  }
  j["curves"] = curves;
  if (!albl.empty()) j["albl"] = albl;
  return j;
}

// Write to a sibling temp file and rename over the target.
inline void write_file_atomically(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, target);
}

inline std::vector<double> mean_curve(const std::vector<TrialResult>& results,
                                      const std::string& strategy) {
  std::vector<double> mean;
  std::size_t n = 0;
  for (const auto& r : results) {
    if (r.curve.strategy != strategy) continue;
    if (mean.empty()) mean.assign(r.curve.error_rates.size(), 0.0);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r.curve.error_rates[i];
    ++n;
  }
  for (double& v : mean) v /= static_cast<double>(n);
  return mean;
}

inline void validate(const ExperimentConfig& config) {
  if (config.strategies.empty()) throw UsageError("no strategies given");
  if (config.trials == 0) throw UsageError("trials must be at least 1");
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0)) {
    throw UsageError("test fraction must lie in (0, 1)");
  }
}

// Runs every (strategy, trial) pair on the loaded dataset. Trials fan out to
// worker threads; each owns its pool, strategy and model.
inline RunRecord run_experiment(const ExperimentConfig& config, const RawDataset& data) {
  validate(config);
  RunRecord record;
  record.config = config;
  const std::size_t n_jobs = config.strategies.size() * config.trials;
  std::vector<std::optional<TrialResult>> slots(n_jobs);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;

  auto worker = [&] {
    for (std::size_t job = next++; job < n_jobs; job = next++) {
      {
        std::lock_guard lock(error_mutex);
        if (failure) return;
      }
      try {
        slots[job] = run_trial(config, data, config.strategies[job / config.trials],
                               job % config.trials);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  unsigned threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_jobs)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (auto& slot : slots) {
    if (slot) record.results.push_back(std::move(*slot));
  }
  if (failure) {
    record.valid = false;
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      record.error = e.what();
    }
    if (!config.out_json.empty()) {
      write_file_atomically(config.out_json, to_json(record).dump(2) + "\n");
    }
    std::rethrow_exception(failure);
  }
  for (const auto& s : config.strategies) {
    record.mean_curves.push_back(mean_curve(record.results, s.text));
  }
  if (!config.out_csv.empty()) {
    std::ostringstream csv;
    write_csv(csv, record.results);
    write_file_atomically(config.out_csv, csv.str());
  }
  if (!config.out_json.empty()) {
    write_file_atomically(config.out_json, to_json(record).dump(2) + "\n");
  }
  return record;
}

inline RunRecord run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, load_libsvm(config.data_path));
}

}  // namespace alkit
