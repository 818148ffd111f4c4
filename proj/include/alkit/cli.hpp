#pragma once

#include <csignal>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "alkit/experiment.hpp"
#include "alkit/service.hpp"

namespace alkit {

namespace detail {

inline std::optional<std::pair<std::size_t, std::size_t>> parse_shape(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto x = text.find('x');
  if (x == std::string::npos) throw UsageError("image shape must look like ROWSxCOLS");
  try {
    return std::make_pair(std::stoul(text.substr(0, x)), std::stoul(text.substr(x + 1)));
  } catch (const std::exception&) {
    throw UsageError("image shape must look like ROWSxCOLS");
  }
}

inline void print_summary(std::ostream& out, const RunRecord& record) {
  for (std::size_t s = 0; s < record.mean_curves.size(); ++s) {
    const auto& curve = record.mean_curves[s];
    out << record.config.strategies[s].text << ": mean error " << format_fixed6(curve.front())
        << " -> " << format_fixed6(curve.back()) << " after " << curve.size() - 1
        << " queries\n";
  }
}

// Interactive loop on a terminal: the human is the oracle.
inline int run_label_session(const ExperimentConfig& config, const std::string& shape,
                             std::istream& in, std::ostream& out) {
  const RawDataset data = load_libsvm(config.data_path);
  const TrialData td = prepare_trial_data(data, config.test_fraction, config.scale, config.seed);
  const auto raw = split(data, config.test_fraction, config.seed).first;
  SeededPool seeded = seed_pool(td.train, config.n_labeled, config.seed);
  Pool& pool = seeded.pool;
  const std::size_t quota = std::min(config.quota, pool.unlabeled_count());
  auto strategy = make_strategy(config.strategies.front(), pool, config.model, config.seed);
  auto model = make_model(config.model, derive_seed(config.seed, 7));
  DisplayHint hint;
  hint.image_shape = parse_shape(shape);
  TerminalLabeler labeler(in, out, data.class_table, hint);

  model->train(pool);
  out << "initial error " << format_fixed6(1.0 - model->score(td.test.features, td.test.labels))
      << "\n";
  for (std::size_t q = 0; q < quota; ++q) {
    const EntryId id = strategy->make_query();
    const ClassId label = labeler.label(id, raw.features.row(id));
    pool.update(id, label);
    model->train(pool);
    out << "query " << q + 1 << "/" << quota << " error "
        << format_fixed6(1.0 - model->score(td.test.features, td.test.labels)) << "\n";
  }
  return 0;
}

}  // namespace detail

// Entry point for the `alkit` tool. Exit codes: 0 success, 1 runtime error,
// 2 usage error.
inline int cli_main(int argc, const char* const* argv, std::istream& in = std::cin,
                    std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Pool-based active learning experiments and labeling sessions", "alkit"};
  app.require_subcommand(1);

  ExperimentConfig config;
  std::string strategies = "uncertainty,random,qbc,dwus,albl";
  std::string model = "logreg";

  auto* run = app.add_subcommand("run", "Run (strategy x trial) experiments with a simulated oracle");
  run->add_option("--data", config.data_path, "LIBSVM dataset")->required();
  run->add_option("--strategies", strategies, "Comma-separated: " + valid_strategy_list());
  run->add_option("--model", model, "logreg or linsvm");
  run->add_option("--quota", config.quota, "Queries per trial");
  run->add_option("--trials", config.trials, "Trials per strategy");
  run->add_option("--test-fraction", config.test_fraction, "Held-out fraction");
  run->add_option("--n-labeled", config.n_labeled, "Initially labeled examples");
  run->add_option("--seed", config.seed, "Base seed; trial t uses seed + t");
  run->add_flag("--scale", config.scale, "Min-max scale features to [-1, 1]");
  run->add_option("--out-csv", config.out_csv, "Learning curves CSV");
  run->add_option("--out-json", config.out_json, "Run record JSON");
  run->add_option("--threads", config.threads, "Worker threads (0 = all cores)");

  std::string label_strategy = "uncertainty";
  std::string image_shape;
  auto* label = app.add_subcommand("label", "Label queries interactively on the terminal");
  label->add_option("--data", config.data_path, "LIBSVM dataset")->required();
  label->add_option("--strategy", label_strategy, "Query strategy");
  label->add_option("--model", model, "logreg or linsvm");
  label->add_option("--quota", config.quota, "Number of queries");
  label->add_option("--test-fraction", config.test_fraction, "Held-out fraction");
  label->add_option("--n-labeled", config.n_labeled, "Initially labeled examples");
  label->add_option("--seed", config.seed, "Seed");
  label->add_flag("--scale", config.scale, "Min-max scale features for the model");
  label->add_option("--image-shape", image_shape, "Render features as ROWSxCOLS image");

  int port = 8080;
  std::string host = "127.0.0.1";
  std::string data_dir;
  std::string ui_dir;
  ServiceOptions service_options;
  long idle_seconds = 3600;
  auto* serve = app.add_subcommand("serve", "Serve the labeling session HTTP API");
  serve->add_option("--port", port, "Port");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--data", data_dir, "Directory of *.libsvm datasets")->required();
  serve->add_option("--log-dir", service_options.log_dir, "Per-session JSONL event logs");
  serve->add_option("--idle-timeout", idle_seconds, "Session idle expiry in seconds");
  serve->add_option("--ui", ui_dir, "Static web UI directory to mount at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    config.model = parse_model_kind(model);
    if (*run) {
      config.strategies = parse_strategy_list(strategies);
      const auto record = run_experiment(config);
      detail::print_summary(out, record);
      return 0;
    }
    if (*label) {
      config.strategies = {parse_strategy_spec(label_strategy)};
      return detail::run_label_session(config, image_shape, in, out);
    }
    service_options.idle_timeout = std::chrono::seconds(idle_seconds);
    SessionService service(load_dataset_dir(data_dir), service_options);
    httplib::Server server;
    service.register_routes(server);
    if (!ui_dir.empty() && !server.set_mount_point("/", ui_dir)) {
      throw UsageError("cannot mount UI directory '" + ui_dir + "'");
    }
    out << "listening on http://" << host << ":" << port << std::endl;
    if (!server.listen(host, port)) throw Error("cannot listen on port " + std::to_string(port));
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n"
        << app.help() << std::flush;
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << std::endl;
    return 1;
  }
}

}  // namespace alkit
