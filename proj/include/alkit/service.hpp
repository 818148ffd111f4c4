#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "alkit/experiment.hpp"

namespace alkit {

struct BundledDataset {
  std::string id;
  RawDataset data;
  DisplayHint hint;
};

// Every *.libsvm file in `dir`, keyed by file stem, sorted by id.
inline std::vector<BundledDataset> load_dataset_dir(const std::string& dir) {
  std::vector<BundledDataset> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".libsvm") continue;
    out.push_back({entry.path().stem().string(), load_libsvm(entry.path().string()), {}});
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

struct ServiceOptions {
  std::chrono::seconds idle_timeout{3600};
  std::string log_dir;  // empty = no event log
  double test_fraction = 0.33;
  bool scale = true;
  std::function<std::chrono::steady_clock::time_point()> clock = [] {
    return std::chrono::steady_clock::now();
  };
};

// One live labeling session. Idle -> (query) -> Pending -> (label) -> Idle.
struct Session {
  std::string id;
  std::string dataset_id;
  std::string strategy_text;
  std::mutex mutex;
  Matrix display_features;  // unscaled, for the human
  RawDataset test;
  std::vector<std::string> class_table;
  DisplayHint hint;
  std::unique_ptr<Pool> pool;  // declared before the strategy that observes it
  std::unique_ptr<QueryStrategy> strategy;
  std::unique_ptr<Model> model;
  std::size_t quota = 0;
  std::size_t queries_used = 0;
  std::optional<EntryId> pending;
  std::vector<double> curve;
  std::chrono::steady_clock::time_point last_access;
};

inline nlohmann::json error_body(const std::string& message) { return {{"error", message}}; }

inline nlohmann::json to_json(const DisplayHint& hint, std::size_t width) {
  if (hint.image_shape) {
    return {{"kind", "image"}, {"shape", {hint.image_shape->first, hint.image_shape->second}}};
  }
  std::vector<std::string> names = hint.feature_names;
  for (std::size_t j = names.size(); j < width; ++j) names.push_back("f" + std::to_string(j + 1));
  return {{"kind", "table"}, {"feature_names", names}};
}

// Transport-independent session API; register_routes() binds it to HTTP.
class SessionService {
 public:
  explicit SessionService(std::vector<BundledDataset> datasets, ServiceOptions options = {})
      : datasets_(std::move(datasets)), options_(std::move(options)) {}

  ApiResponse list_datasets() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& d : datasets_) {
      list.push_back({{"dataset_id", d.id},
                      {"n", d.data.size()},
                      {"d", d.data.dimensionality()},
                      {"classes", d.data.class_table}});
    }
    return {200, list};
  }

  ApiResponse create_session(const nlohmann::json& body) {
    expire_idle();
    if (!body.is_object()) return {400, error_body("body must be a JSON object")};
    const BundledDataset* dataset = nullptr;
    std::string strategy_text = "uncertainty", model_name = "logreg";
    std::size_t quota = 0, n_labeled = 10;
    std::uint64_t seed = 0;
    try {
      const auto id = body.at("dataset_id").get<std::string>();
      for (const auto& d : datasets_) {
        if (d.id == id) dataset = &d;
      }
      if (!dataset) return {404, error_body("unknown dataset '" + id + "'")};
      strategy_text = body.value("strategy", strategy_text);
      model_name = body.value("model", model_name);
      quota = body.at("quota").get<std::size_t>();
      n_labeled = body.value("n_labeled", n_labeled);
      seed = body.value("seed", seed);
    } catch (const nlohmann::json::exception& e) {
      return {400, error_body(std::string("bad session request: ") + e.what())};
    }

    auto session = std::make_shared<Session>();
    try {
      const auto spec = parse_strategy_spec(strategy_text);
      const auto model_kind = parse_model_kind(model_name);
      auto [train, test] = split(dataset->data, options_.test_fraction, seed);
      session->display_features = train.features;
      if (options_.scale) {
        const auto scaler = MinMaxScaler::fit(train.features);
        train.features = scaler.transform(train.features);
        test.features = scaler.transform(test.features);
      }
      SeededPool seeded = seed_pool(train, n_labeled, seed);
      if (quota == 0 || quota > seeded.pool.unlabeled_count()) {
        return {400, error_body("quota must lie in [1, " +
                                std::to_string(seeded.pool.unlabeled_count()) + "]")};
      }
      session->pool = std::make_unique<Pool>(std::move(seeded.pool));
      session->strategy = make_strategy(spec, *session->pool, model_kind, seed);
      session->model = make_model(model_kind, derive_seed(seed, 7));
      session->model->train(*session->pool);
      session->test = std::move(test);
      session->curve.push_back(
          1.0 - session->model->score(session->test.features, session->test.labels));
      session->strategy_text = spec.text;
    } catch (const UsageError& e) {
      return {400, error_body(e.what())};
    } catch (const Error& e) {
      return {400, error_body(e.what())};
    }
    session->dataset_id = dataset->id;
    session->class_table = dataset->data.class_table;
    session->hint = dataset->hint;
    session->quota = quota;
    session->last_access = options_.clock();
    session->id = new_session_id();

    const nlohmann::json response{
        {"session_id", session->id}, {"classes", session->class_table}, {"quota", quota}};
    log_event(*session, "create",
              {{"dataset_id", dataset->id},
               {"strategy", session->strategy_text},
               {"model", model_name},
               {"quota", quota},
               {"n_labeled", n_labeled},
               {"seed", seed}});
    {
      std::lock_guard lock(store_mutex_);
      sessions_[session->id] = session;
    }
    return {201, response};
  }

  ApiResponse get_query(const std::string& id) {
    auto session = find(id);
    if (!session) return {404, error_body("unknown session")};
    std::lock_guard lock(session->mutex);
    session->last_access = options_.clock();
    if (!session->pending) {
      if (session->queries_used >= session->quota) {
        return {409, error_body("quota exhausted")};
      }
      try {
        session->pending = session->strategy->make_query();
      } catch (const Error& e) {
        return {500, error_body(e.what())};
      }
      log_event(*session, "query", {{"entry_id", *session->pending}});
    }
    const auto row = session->display_features.row(*session->pending);
    return {200,
            {{"entry_id", *session->pending},
             {"features", std::vector<double>(row.begin(), row.end())},
             {"display_hint", to_json(session->hint, row.size())},
             {"queries_used", session->queries_used},
             {"quota", session->quota}}};
  }

  ApiResponse post_label(const std::string& id, const nlohmann::json& body) {
    auto session = find(id);
    if (!session) return {404, error_body("unknown session")};
    EntryId entry = 0;
    std::string token;
    try {
      entry = body.at("entry_id").get<EntryId>();
      token = body.at("label_token").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      return {400, error_body(std::string("bad label request: ") + e.what())};
    }
    std::lock_guard lock(session->mutex);
    session->last_access = options_.clock();
    if (!session->pending || *session->pending != entry) {
      return {409, error_body("entry " + std::to_string(entry) + " is not the pending query")};
    }
    const auto it = std::find(session->class_table.begin(), session->class_table.end(), token);
    if (it == session->class_table.end()) {
      return {422, error_body("invalid label token '" + token + "'")};
    }
    const auto label = static_cast<ClassId>(it - session->class_table.begin());
    try {
      session->pool->update(entry, label);
      session->model->train(*session->pool);
    } catch (const Error& e) {
      return {500, error_body(e.what())};
    }
    const double error_rate =
        1.0 - session->model->score(session->test.features, session->test.labels);
    session->curve.push_back(error_rate);
    session->pending.reset();
    ++session->queries_used;
    log_event(*session, "label",
              {{"entry_id", entry}, {"label_token", token}, {"error_rate", error_rate}});
    return {200,
            {{"accepted", true},
             {"error_rate", error_rate},
             {"queries_used", session->queries_used}}};
  }

  ApiResponse get_curve(const std::string& id) {
    auto session = find(id);
    if (!session) return {404, error_body("unknown session")};
    std::lock_guard lock(session->mutex);
    session->last_access = options_.clock();
    nlohmann::json body{{"error_rates", session->curve},
                        {"queries_used", session->queries_used},
                        {"quota", session->quota}};
    if (const auto* albl =
            dynamic_cast<const ActiveLearningByLearning*>(session->strategy.get())) {
      body["albl_weights"] = albl->weights();
      body["albl_candidates"] = albl->snapshot().candidates;
    }
    return {200, body};
  }

  // Drops sessions idle for longer than the timeout; returns how many.
  std::size_t expire_idle() {
    const auto now = options_.clock();
    std::lock_guard lock(store_mutex_);
    std::size_t dropped = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      std::unique_lock session_lock(it->second->mutex, std::try_to_lock);
      if (session_lock && now - it->second->last_access > options_.idle_timeout) {
        session_lock.unlock();
        it = sessions_.erase(it);
        ++dropped;
      } else {
        ++it;
      }
    }
    return dropped;
  }

  std::size_t session_count() const {
    std::lock_guard lock(store_mutex_);
    return sessions_.size();
  }

  // Test hook: the pool behind a session.
  const Pool* session_pool(const std::string& id) {
    auto s = find(id);
    return s ? s->pool.get() : nullptr;
  }

  void register_routes(httplib::Server& server) {
    auto reply = [](httplib::Response& res, const ApiResponse& api) {
      res.status = api.status;
      res.set_content(api.body.dump(), "application/json; charset=utf-8");
    };
    auto parse = [](const httplib::Request& req) {
      return nlohmann::json::parse(req.body, nullptr, false);
    };
    server.Get("/api/datasets", [this, reply](const httplib::Request&, httplib::Response& res) {
      reply(res, list_datasets());
    });
    server.Post("/api/sessions",
                [this, reply, parse](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse(req);
                  if (body.is_discarded()) return reply(res, {400, error_body("invalid JSON")});
                  reply(res, create_session(body));
                });
    server.Get(R"(/api/sessions/([^/]+)/query)",
               [this, reply](const httplib::Request& req, httplib::Response& res) {
                 reply(res, get_query(req.matches[1]));
               });
    server.Post(R"(/api/sessions/([^/]+)/label)",
                [this, reply, parse](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse(req);
                  if (body.is_discarded()) return reply(res, {400, error_body("invalid JSON")});
                  reply(res, post_label(req.matches[1], body));
                });
    server.Get(R"(/api/sessions/([^/]+)/curve)",
               [this, reply](const httplib::Request& req, httplib::Response& res) {
                 reply(res, get_curve(req.matches[1]));
               });
  }

 private:
  std::shared_ptr<Session> find(const std::string& id) {
    expire_idle();
    std::lock_guard lock(store_mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  std::string new_session_id() {
    std::lock_guard lock(id_mutex_);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string id;
    for (int i = 0; i < 2; ++i) {
      const std::uint64_t x = id_rng_();
      for (int b = 0; b < 16; ++b) id += kHex[(x >> (4 * b)) & 0xf];
    }
    return id;
  }

  void log_event(const Session& session, const std::string& event,
                 const nlohmann::json& payload) const {
    if (options_.log_dir.empty()) return;
    const auto ts = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::system_clock::now().time_since_epoch())
                        .count();
    const nlohmann::json line{
        {"ts", ts}, {"session_id", session.id}, {"event", event}, {"payload", payload}};
    std::filesystem::create_directories(options_.log_dir);
    std::ofstream out(std::filesystem::path(options_.log_dir) / (session.id + ".jsonl"),
                      std::ios::app);
    out << line.dump() << '\n';
  }

  std::vector<BundledDataset> datasets_;
  ServiceOptions options_;
  mutable std::mutex store_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mutex id_mutex_;
  std::mt19937_64 id_rng_{std::random_device{}()};
};

}  // namespace alkit
