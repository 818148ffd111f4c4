#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "alkit/service.hpp"

using namespace alkit;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<BundledDataset> bundled() {
  static const auto d = load_dataset_dir(ALKIT_DATA_DIR);
  return d;
}

json create_body(const std::string& strategy = "uncertainty", std::size_t quota = 5) {
  return {{"dataset_id", "heart"}, {"strategy", strategy}, {"model", "logreg"},
          {"quota", quota},        {"n_labeled", 10},      {"seed", 3}};
}

std::string create(SessionService& svc, const json& body = create_body()) {
  const auto r = svc.create_session(body);
  EXPECT_EQ(r.status, 201) << r.body.dump();
  return r.body.value("session_id", "");
}

void check_pool(const Pool& pool) {
  const auto lab = pool.labeled_view();
  const auto unl = pool.unlabeled_view();
  ASSERT_EQ(lab.size() + unl.size(), pool.size());
  ASSERT_EQ(lab.size(), pool.labeled_count());
}

}  // namespace

TEST(SessionService, ListsBundledDatasets) {
  SessionService svc(bundled());
  const auto r = svc.list_datasets();
  ASSERT_EQ(r.status, 200);
  ASSERT_EQ(r.body.size(), 3u);
  EXPECT_EQ(r.body[0]["dataset_id"], "australian");
  EXPECT_EQ(r.body[2]["dataset_id"], "heart");
  EXPECT_EQ(r.body[2]["n"], 270);
  EXPECT_EQ(r.body[2]["d"], 13);
  EXPECT_EQ(r.body[2]["classes"].size(), 2u);
}

TEST(SessionService, CreateQueryLabelCurve) {
  SessionService svc(bundled());
  const auto created = svc.create_session(create_body());
  ASSERT_EQ(created.status, 201);
  EXPECT_EQ(created.body["quota"], 5);
  EXPECT_EQ(created.body["classes"].size(), 2u);
  const std::string id = created.body["session_id"];

  auto curve = svc.get_curve(id);
  ASSERT_EQ(curve.status, 200);
  EXPECT_EQ(curve.body["error_rates"].size(), 1u);
  EXPECT_FALSE(curve.body.contains("albl_weights"));

  const auto q1 = svc.get_query(id);
  ASSERT_EQ(q1.status, 200);
  EXPECT_EQ(q1.body["features"].size(), 13u);
  EXPECT_EQ(q1.body["display_hint"]["kind"], "table");
  EXPECT_EQ(q1.body["queries_used"], 0);
  const auto q2 = svc.get_query(id);
  EXPECT_EQ(q1.body["entry_id"], q2.body["entry_id"]);

  const EntryId entry = q1.body["entry_id"];
  const auto stale = svc.post_label(id, {{"entry_id", entry + 1}, {"label_token", "+1"}});
  EXPECT_EQ(stale.status, 409);
  const auto bad = svc.post_label(id, {{"entry_id", entry}, {"label_token", "maybe"}});
  EXPECT_EQ(bad.status, 422);

  const auto ok = svc.post_label(id, {{"entry_id", entry}, {"label_token", "+1"}});
  ASSERT_EQ(ok.status, 200);
  EXPECT_TRUE(ok.body["accepted"].get<bool>());
  EXPECT_EQ(ok.body["queries_used"], 1);
  const double err = ok.body["error_rate"];
  EXPECT_GE(err, 0.0);
  EXPECT_LE(err, 1.0);

  curve = svc.get_curve(id);
  EXPECT_EQ(curve.body["error_rates"].size(), 2u);
  EXPECT_EQ(curve.body["queries_used"], 1);

  // Relabeling the same entry is no longer pending.
  EXPECT_EQ(svc.post_label(id, {{"entry_id", entry}, {"label_token", "+1"}}).status, 409);
}

TEST(SessionService, QuotaExhaustionLocksQueries) {
  SessionService svc(bundled());
  const auto id = create(svc, create_body("random", 3));
  for (int i = 0; i < 3; ++i) {
    const auto q = svc.get_query(id);
    ASSERT_EQ(q.status, 200);
    const EntryId e = q.body["entry_id"];
    ASSERT_EQ(svc.post_label(id, {{"entry_id", e}, {"label_token", "-1"}}).status, 200);
  }
  EXPECT_EQ(svc.get_query(id).status, 409);
  EXPECT_EQ(svc.get_curve(id).body["error_rates"].size(), 4u);
  EXPECT_EQ(svc.session_pool(id)->labeled_count(), 13u);
}

TEST(SessionService, RejectsBadRequests) {
  SessionService svc(bundled());
  EXPECT_EQ(svc.create_session(json::array()).status, 400);
  EXPECT_EQ(svc.create_session({{"dataset_id", "heart"}}).status, 400);
  EXPECT_EQ(svc.create_session({{"dataset_id", 7}, {"quota", 3}}).status, 400);
  auto unknown = create_body();
  unknown["dataset_id"] = "mnist";
  EXPECT_EQ(svc.create_session(unknown).status, 404);
  EXPECT_EQ(svc.create_session(create_body("bogus")).status, 400);
  EXPECT_EQ(svc.create_session(create_body("random", 0)).status, 400);
  EXPECT_EQ(svc.create_session(create_body("random", 100000)).status, 400);
  auto bad_model = create_body();
  bad_model["model"] = "rbf";
  EXPECT_EQ(svc.create_session(bad_model).status, 400);

  EXPECT_EQ(svc.get_query("nope").status, 404);
  EXPECT_EQ(svc.get_curve("nope").status, 404);
  EXPECT_EQ(svc.post_label("nope", {{"entry_id", 1}, {"label_token", "+1"}}).status, 404);

  const auto id = create(svc);
  EXPECT_EQ(svc.post_label(id, {{"entry_id", 1}, {"label_token", "+1"}}).status, 409);
  EXPECT_EQ(svc.post_label(id, {{"label_token", "+1"}}).status, 400);
  EXPECT_EQ(svc.session_count(), 1u);
}

TEST(SessionService, AlblSessionsReportWeights) {
  SessionService svc(bundled());
  const auto id = create(svc, create_body("albl", 2));
  const auto q = svc.get_query(id);
  const EntryId e = q.body["entry_id"];
  ASSERT_EQ(svc.post_label(id, {{"entry_id", e}, {"label_token", "+1"}}).status, 200);
  const auto curve = svc.get_curve(id);
  ASSERT_TRUE(curve.body.contains("albl_weights"));
  EXPECT_EQ(curve.body["albl_weights"].size(), 4u);
  double total = 0;
  for (double w : curve.body["albl_weights"]) total += w;
  EXPECT_NEAR(total, 4.0, 1e-9);
  EXPECT_EQ(curve.body["albl_candidates"][0], "uncertainty");
}

TEST(SessionService, IdleSessionsExpire) {
  auto now = std::chrono::steady_clock::time_point{};
  ServiceOptions opts;
  opts.idle_timeout = std::chrono::seconds(60);
  opts.clock = [&] { return now; };
  SessionService svc(bundled(), opts);
  const auto a = create(svc);
  now += std::chrono::seconds(30);
  const auto b = create(svc);
  now += std::chrono::seconds(40);
  EXPECT_EQ(svc.get_query(a).status, 404);
  EXPECT_EQ(svc.get_query(b).status, 200);
  EXPECT_EQ(svc.session_count(), 1u);
}

TEST(SessionService, WritesJsonlEventLog) {
  const auto dir = fs::temp_directory_path() / "alkit_service_log";
  fs::remove_all(dir);
  ServiceOptions opts;
  opts.log_dir = dir.string();
  SessionService svc(bundled(), opts);
  const auto id = create(svc);
  const EntryId e = svc.get_query(id).body["entry_id"];
  svc.get_query(id);  // idempotent: no second query event
  svc.post_label(id, {{"entry_id", e}, {"label_token", "-1"}});

  std::ifstream in(dir / (id + ".jsonl"));
  std::vector<json> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(json::parse(line));
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0]["event"], "create");
  EXPECT_EQ(lines[1]["event"], "query");
  EXPECT_EQ(lines[1]["payload"]["entry_id"], e);
  EXPECT_EQ(lines[2]["event"], "label");
  for (const auto& l : lines) {
    EXPECT_EQ(l["session_id"], id);
    EXPECT_TRUE(l["ts"].is_number());
  }
}

// Random interleavings of valid and invalid calls keep the state machine and
// the pool consistent.
TEST(SessionService, RandomInterleavingsKeepInvariants) {
  SessionService svc(bundled());
  const auto id = create(svc, create_body("uncertainty", 8));
  std::mt19937 gen(5);
  std::optional<EntryId> pending;
  std::size_t used = 0;
  for (int step = 0; step < 200; ++step) {
    switch (gen() % 4) {
      case 0: {
        const auto r = svc.get_query(id);
        if (used == 8) {
          EXPECT_EQ(r.status, 409);
        } else {
          ASSERT_EQ(r.status, 200);
          if (pending) {
            EXPECT_EQ(r.body["entry_id"].get<EntryId>(), *pending);
          }
          pending = r.body["entry_id"].get<EntryId>();
        }
        break;
      }
      case 1: {
        const EntryId e = pending && gen() % 2 ? *pending : gen() % 180;
        const auto r = svc.post_label(id, {{"entry_id", e}, {"label_token", e % 2 ? "+1" : "-1"}});
        if (pending && e == *pending) {
          EXPECT_EQ(r.status, 200);
          pending.reset();
          ++used;
        } else {
          EXPECT_EQ(r.status, 409);
        }
        break;
      }
      case 2: {
        if (pending) {
          EXPECT_EQ(svc.post_label(id, {{"entry_id", *pending}, {"label_token", "?"}}).status, 422);
        }
        break;
      }
      default: {
        const auto c = svc.get_curve(id);
        EXPECT_EQ(c.body["error_rates"].size(), used + 1);
      }
    }
    check_pool(*svc.session_pool(id));
    EXPECT_EQ(svc.session_pool(id)->labeled_count(), 10 + used);
  }
}

TEST(SessionService, ConcurrentSessionsAreIsolated) {
  SessionService svc(bundled());
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) ids.push_back(create(svc, create_body("random", 6)));
  std::vector<std::jthread> workers;
  for (const auto& id : ids) {
    workers.emplace_back([&svc, id] {
      for (int i = 0; i < 6; ++i) {
        const EntryId e = svc.get_query(id).body["entry_id"];
        svc.post_label(id, {{"entry_id", e}, {"label_token", "+1"}});
      }
    });
  }
  workers.clear();
  for (const auto& id : ids) {
    EXPECT_EQ(svc.get_curve(id).body["error_rates"].size(), 7u);
    EXPECT_EQ(svc.get_query(id).status, 409);
  }
}

TEST(SessionServiceHttp, EndToEndOverSockets) {
  SessionService svc(bundled());
  httplib::Server server;
  svc.register_routes(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::jthread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto datasets = client.Get("/api/datasets");
  ASSERT_TRUE(datasets);
  EXPECT_EQ(datasets->status, 200);
  EXPECT_EQ(json::parse(datasets->body).size(), 3u);

  auto created = client.Post("/api/sessions", create_body("albl", 2).dump(), "application/json");
  ASSERT_TRUE(created);
  ASSERT_EQ(created->status, 201);
  EXPECT_NE(created->get_header_value("Content-Type").find("application/json"), std::string::npos);
  const std::string id = json::parse(created->body)["session_id"];

  auto q1 = client.Get("/api/sessions/" + id + "/query");
  auto q2 = client.Get("/api/sessions/" + id + "/query");
  ASSERT_TRUE(q1 && q2);
  EXPECT_EQ(json::parse(q1->body)["entry_id"], json::parse(q2->body)["entry_id"]);
  const EntryId e = json::parse(q1->body)["entry_id"];

  auto bad_json = client.Post("/api/sessions/" + id + "/label", "{oops", "application/json");
  ASSERT_TRUE(bad_json);
  EXPECT_EQ(bad_json->status, 400);
  auto stale = client.Post("/api/sessions/" + id + "/label",
                           json{{"entry_id", e + 1}, {"label_token", "+1"}}.dump(), "application/json");
  EXPECT_EQ(stale->status, 409);
  auto invalid = client.Post("/api/sessions/" + id + "/label",
                             json{{"entry_id", e}, {"label_token", "x"}}.dump(), "application/json");
  EXPECT_EQ(invalid->status, 422);
  auto labeled = client.Post("/api/sessions/" + id + "/label",
                             json{{"entry_id", e}, {"label_token", "-1"}}.dump(), "application/json");
  ASSERT_TRUE(labeled);
  EXPECT_EQ(labeled->status, 200);

  auto curve = client.Get("/api/sessions/" + id + "/curve");
  ASSERT_TRUE(curve);
  const auto body = json::parse(curve->body);
  EXPECT_EQ(body["error_rates"].size(), 2u);
  EXPECT_EQ(body["albl_weights"].size(), 4u);

  EXPECT_EQ(client.Get("/api/sessions/unknown/curve")->status, 404);
  EXPECT_EQ(client.Post("/api/sessions", "not json", "application/json")->status, 400);
  server.stop();
}
