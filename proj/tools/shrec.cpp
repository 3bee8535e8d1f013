// Copyright 2026, The shrec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command line entry points: mine, rules extract, serve, replay, bench.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <unistd.h>

#include "CLI11.hpp"
#include "shrec/api.hpp"
#include "shrec/bench.hpp"
#include "shrec/errors.hpp"
#include "shrec/events.hpp"
#include "shrec/intake.hpp"
#include "shrec/rules.hpp"
#include "shrec/serialization.hpp"
#include "shrec/service.hpp"
#include "shrec/wsdd.hpp"

namespace {

using namespace shrec;

struct LogOptions {
  std::string policy = "device";
  std::vector<std::int64_t> excluded_sources;
  bool exclude_broadcast = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--policy", policy, "Symbol policy: device or group")
        ->check(CLI::IsMember({"device", "group"}));
    cmd->add_option("--exclude-source", excluded_sources, "Source ids of timers and sensors");
    cmd->add_flag("--exclude-broadcast", exclude_broadcast,
                  "Drop broadcast and unknown-group events");
  }

  Symbolized load(const std::string& path, std::string* home = nullptr) const {
    auto parsed = parse_log_file(path);
    if (parsed.skipped) spdlog::warn("{}: skipped {} malformed records", path, parsed.skipped);
    EventFilter filter;
    filter.excluded_sources = {excluded_sources.begin(), excluded_sources.end()};
    filter.exclude_broadcast_unknown = exclude_broadcast;
    auto log = filter_events(parsed.log, filter);
    if (home) *home = log.home_id;
    return symbolize(log, *policy_from_string(policy));
  }
};

struct MiningOptions {
  MiningParams params;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--min-support", params.min_support, "Relative support lower bound");
    cmd->add_option("--max-window", params.max_window, "Longest pattern");
    cmd->add_option("--wildcards", params.max_wildcards, "Interior wildcards per pattern");
  }
};

std::ostream& output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw IoError("cannot write " + path);
  return file;
}

std::vector<AssociationRule> extract_from(const Symbolized& sym, const MiningResult& mined,
                                          const ActionCatalog& catalog, const std::string& home) {
  std::vector<Pattern> patterns;
  for (const auto& m : mined) patterns.push_back(m.pattern);
  return extract_rules(patterns, catalog.bind(sym.table), sym.symbols,
                       RegressionModel::unit_defaults(), SuffixPolicy::discard, home);
}

int run_mine(const std::string& log_path, const LogOptions& log_opts,
             const MiningOptions& mining, const std::string& out, const std::string& symbols_out) {
  auto sym = log_opts.load(log_path);
  auto result = mine(sym.symbols, sym.timestamps, mining.params);
  std::ofstream file;
  write_patterns_jsonl(output(out, file), result);
  if (!symbols_out.empty()) {
    std::ofstream sfile;
    sym.table.write_jsonl(output(symbols_out, sfile));
  }
  spdlog::info("{} events, {} symbols, {} patterns", sym.symbols.size(), sym.table.size(),
               result.size());
  return 0;
}

int run_extract(const std::string& patterns_path, const std::string& actions,
                const std::string& log_path, const LogOptions& log_opts, const std::string& out) {
  std::ifstream pin(patterns_path);
  if (!pin) throw IoError("cannot open " + patterns_path);
  auto mined = read_patterns_jsonl(pin);
  std::string home;
  auto sym = log_opts.load(log_path, &home);
  auto catalog = actions.empty() ? ActionCatalog::defaults() : ActionCatalog::load(actions);
  auto rules = extract_from(sym, mined, catalog, home);
  std::ofstream file;
  write_rules_jsonl(output(out, file), rules);
  spdlog::info("{} rules from {} patterns", rules.size(), mined.size());
  return 0;
}

ApiServer* g_server = nullptr;

int run_serve(const std::string& host, int port, const std::string& data_dir,
              const std::string& token) {
  Service service(ServiceOptions{.data_dir = data_dir});
  ApiOptions options{.host = host, .port = port, .token = std::nullopt};
  if (!token.empty()) options.token = token;
  ApiServer server(service, options);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  server.run();
  g_server = nullptr;
  return 0;
}

int run_replay(const std::string& log_path, double speed, const std::string& rules_path,
               const std::string& actions, const std::string& data_dir,
               const LogOptions& log_opts, const MiningOptions& mining) {
  std::string home;
  auto sym = log_opts.load(log_path, &home);
  std::vector<AssociationRule> rules;
  if (!rules_path.empty()) {
    std::ifstream in(rules_path);
    if (!in) throw IoError("cannot open " + rules_path);
    rules = read_rules_jsonl(in);
  } else {
    auto catalog = actions.empty() ? ActionCatalog::defaults() : ActionCatalog::load(actions);
    rules = extract_from(sym, mine(sym.symbols, sym.timestamps, mining.params), catalog, home);
    spdlog::info("mined {} rules from the log itself", rules.size());
  }
  std::filesystem::path dir = data_dir;
  if (dir.empty()) {
    dir = std::filesystem::temp_directory_path() /
          ("shrec-replay-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
  }
  Service service(ServiceOptions{.data_dir = dir});
  if (!service.has_home(home)) service.install_home(home, sym.table, rules);

  auto parsed = parse_log_file(log_path);
  EventFilter filter;
  filter.excluded_sources = {log_opts.excluded_sources.begin(), log_opts.excluded_sources.end()};
  filter.exclude_broadcast_unknown = log_opts.exclude_broadcast;
  ReplayOptions replay;
  replay.speed = speed;
  auto result = replay_log(service, filter_events(parsed.log, filter), replay);
  for (const auto& r : result.recommendations) std::cout << nlohmann::json(r).dump() << '\n';
  spdlog::info("{} events delivered, {} rejected, {} recommendations", result.delivered,
               result.rejected, result.recommendations.size());
  if (data_dir.empty()) std::filesystem::remove_all(dir);
  return 0;
}

int run_bench(const std::string& input, const std::string& miners_csv,
              const std::vector<double>& supports, const std::vector<std::size_t>& windows,
              std::size_t wildcards, std::size_t events, std::size_t repeats, double timeout_s,
              const std::string& out, const LogOptions& log_opts) {
  BenchOptions options;
  options.miners.clear();
  std::stringstream ss(miners_csv);
  std::string name;
  while (std::getline(ss, name, ',')) {
    auto m = miner_from_string(name);
    if (!m) throw ValidationError("unknown miner " + name);
    options.miners.push_back(*m);
  }
  options.params.clear();
  for (double s : supports) {
    for (std::size_t w : windows) {
      options.params.push_back(MiningParams{.max_window = w, .min_support = s, .max_wildcards = wildcards});
    }
  }
  options.repeats = repeats;
  options.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(timeout_s * 1000));
  options.progress = [](const BenchRow& r) {
    spdlog::info("{} {} events ms={} W={}: {}", to_string(r.miner), r.events, r.min_support,
                 r.max_window, r.dnf ? std::string("DNF") : fmt::format("{:.1f} ms", r.wall_ms));
  };

  BenchCase bench_case;
  std::filesystem::path path = input;
  auto ext = path.extension().string();
  if (input == "synthetic" || ext == ".toml" ||
      (ext == ".json" && std::filesystem::exists(path))) {
    auto spec = input == "synthetic" ? home_like_spec(events) : load_synthetic_spec(path);
    auto gen = generate(spec);
    bench_case = BenchCase{input, gen.symbols, gen.timestamps};
  } else {
    auto sym = log_opts.load(input);
    bench_case = BenchCase{input, sym.symbols, sym.timestamps};
  }
  auto rows = run_benchmark(std::span(&bench_case, 1), options);
  std::ofstream file;
  write_bench_csv(output(out, file), rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smart home scene recommender: mining, rules, service and benchmarks"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  LogOptions log_opts;
  MiningOptions mining;

  auto* mine_cmd = app.add_subcommand("mine", "Mine frequent patterns from an event log");
  std::string log_path, out, symbols_out;
  mine_cmd->add_option("log", log_path, "JSONL or CSV event log")->required()->check(CLI::ExistingFile);
  mining.add_to(mine_cmd);
  log_opts.add_to(mine_cmd);
  mine_cmd->add_option("--out", out, "Patterns JSONL (default stdout)");
  mine_cmd->add_option("--symbols-out", symbols_out, "Symbol table JSONL");

  auto* rules_cmd = app.add_subcommand("rules", "Association rules");
  rules_cmd->require_subcommand(1);
  auto* extract_cmd = rules_cmd->add_subcommand("extract", "Turn mined patterns into rules");
  std::string patterns_path, actions, rules_out;
  extract_cmd->add_option("patterns", patterns_path, "Patterns JSONL from `mine`")
      ->required()
      ->check(CLI::ExistingFile);
  extract_cmd->add_option("--actions", actions, "Action catalog (JSON or TOML)")
      ->check(CLI::ExistingFile);
  extract_cmd->add_option("--log", log_path, "The log the patterns were mined from")
      ->required()
      ->check(CLI::ExistingFile);
  log_opts.add_to(extract_cmd);
  extract_cmd->add_option("--out", rules_out, "Rules JSONL (default stdout)");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  std::string host = "127.0.0.1", data_dir = "shrec-data", token;
  int port = 8080;
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port, 0 for any free port");
  serve_cmd->add_option("--data-dir", data_dir, "Directory of the store");
  serve_cmd->add_option("--token", token, "Static bearer token");

  auto* replay_cmd = app.add_subcommand("replay", "Replay a log through the recommender");
  double speed = 1000.0;
  std::string rules_path, replay_dir;
  replay_cmd->add_option("log", log_path, "JSONL or CSV event log")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--speed", speed, "Virtual seconds per real second, 0 = no pacing");
  replay_cmd->add_option("--rules", rules_path, "Rules JSONL; mined from the log when absent")
      ->check(CLI::ExistingFile);
  replay_cmd->add_option("--actions", actions, "Action catalog used when mining")
      ->check(CLI::ExistingFile);
  replay_cmd->add_option("--data-dir", replay_dir, "Persist into this store (default: temporary)");
  mining.add_to(replay_cmd);
  log_opts.add_to(replay_cmd);

  auto* bench_cmd = app.add_subcommand("bench", "Benchmark miners on a log or synthetic spec");
  std::string input, miners = "wsdd,prefix,brute", bench_out;
  std::vector<double> supports{0.01};
  std::vector<std::size_t> windows{5};
  std::size_t wildcards = 0, events = 80000, repeats = 5;
  double timeout_s = 600;
  bench_cmd->add_option("input", input, "Event log, synthetic spec (.json/.toml) or `synthetic`")
      ->required();
  bench_cmd->add_option("--miners", miners, "Comma separated: wsdd,prefix,brute");
  bench_cmd->add_option("--min-support", supports, "One or more min_support values");
  bench_cmd->add_option("--max-window", windows, "One or more max_window values");
  bench_cmd->add_option("--wildcards", wildcards, "Interior wildcards per pattern");
  bench_cmd->add_option("--events", events, "Size of the built-in synthetic home");
  bench_cmd->add_option("--repeats", repeats, "Timed runs per row (median reported)");
  bench_cmd->add_option("--timeout", timeout_s, "Seconds per run before DNF");
  bench_cmd->add_option("--out", bench_out, "CSV report (default stdout)");
  log_opts.add_to(bench_cmd);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("shrec"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (mine_cmd->parsed()) return run_mine(log_path, log_opts, mining, out, symbols_out);
    if (extract_cmd->parsed()) return run_extract(patterns_path, actions, log_path, log_opts, rules_out);
    if (serve_cmd->parsed()) return run_serve(host, port, data_dir, token);
    if (replay_cmd->parsed()) {
      return run_replay(log_path, speed, rules_path, actions, replay_dir, log_opts, mining);
    }
    if (bench_cmd->parsed()) {
      return run_bench(input, miners, supports, windows, wildcards, events, repeats, timeout_s,
                       bench_out, log_opts);
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
