// airway: command-line front end for ingest, analysis, simulation, reports
// and the HTTP service.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "airway/alerting.hpp"
#include "airway/api.hpp"
#include "airway/config.hpp"
#include "airway/error.hpp"
#include "airway/fetcher.hpp"
#include "airway/report.hpp"
#include "airway/server.hpp"
#include "airway/simulator.hpp"
#include "airway/validation.hpp"

using namespace airway;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

std::atomic<bool> g_stop{false};

Timestamp now() {
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

struct Globals {
  std::string config_path;
  std::string store_path;
  bool verbose = false;
};

ApiConfig load_settings(const Globals& g) {
  ApiConfig cfg;
  std::string path = g.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnvVar)) path = env;
  }
  if (!path.empty()) cfg = load_config(path);
  if (!g.store_path.empty()) cfg.store_path = g.store_path;
  return cfg;
}

StoreOptions store_options(const ApiConfig& cfg) {
  return {LocalClock{std::chrono::minutes{cfg.utc_offset_minutes}}};
}

ObservationStore open_store(const ApiConfig& cfg) {
  if (cfg.store_path.empty()) {
    throw Error(ErrorCode::config_error, "no store configured (use --store or a config file)");
  }
  return ObservationStore::open(cfg.store_path, store_options(cfg));
}

Date parse_date_arg(const std::string& s, const char* what) {
  try {
    return parse_date(s);
  } catch (const std::exception&) {
    throw Error(ErrorCode::config_error, fmt::format("{} must be YYYY-MM-DD, got {}", what, s));
  }
}

std::string read_file(const std::string& path) {
  if (path == "-") {
    std::stringstream buf;
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::insufficient_data, fmt::format("cannot read {}", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::config_error, fmt::format("cannot write {}", path));
  out << text;
}

// ---- subcommands ----

int cmd_serve(const Globals& g, const std::string& host, int port) {
  auto cfg = load_settings(g);
  if (!host.empty()) cfg.host = host;
  if (port >= 0) cfg.port = port;
  cfg.validate();
  TokenRegistry tokens;
  if (cfg.tokens_path) tokens = TokenRegistry::load(*cfg.tokens_path);
  auto store = cfg.store_path.empty() ? ObservationStore::in_memory(store_options(cfg))
                                      : open_store(cfg);
  ApiService service(store, std::move(tokens), cfg);
  HttpServer server(service);
  int bound = server.bind(cfg.host, cfg.port);
  std::cout << fmt::format("listening on http://{}:{}", cfg.host, bound) << std::endl;

  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  std::thread watcher([&server] {
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
  });
  server.listen();
  g_stop = true;
  watcher.join();
  return 0;
}

int cmd_ingest(const Globals& g, const std::vector<std::string>& files) {
  auto cfg = load_settings(g);
  auto store = open_store(cfg);
  std::size_t patients = 0, accepted = 0, duplicates = 0, conflicts = 0;
  json rejected = json::array();
  Timestamp stamp = now();

  for (auto& file : files) {
    auto text = read_file(file);
    std::vector<Observation> batch;
    auto flush = [&] {
      for (auto outcome : store.upsert_batch(batch)) {
        switch (outcome) {
          case UpsertOutcome::stored: ++accepted; break;
          case UpsertOutcome::duplicate: ++duplicates; break;
          case UpsertOutcome::conflict_applied: ++accepted, ++conflicts; break;
          case UpsertOutcome::conflict_ignored: ++duplicates, ++conflicts; break;
        }
      }
      batch.clear();
    };
    std::size_t line_no = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto reject = [&](ErrorCode code, const std::string& reason) {
        rejected.push_back({{"file", file}, {"line", line_no},
                            {"code", std::string(to_string(code))}, {"reason", reason}});
      };
      json j = json::parse(line, nullptr, false);
      if (j.is_object() && j.size() == 1 && j.contains("profile")) {
        try {
          store.register_patient(profile_from_json(j.at("profile")));
          ++patients;
        } catch (const Error& e) {
          reject(e.code(), e.what());
        }
        continue;
      }
      auto result = validate_line(line, stamp);
      if (auto* rej = std::get_if<Rejection>(&result)) {
        reject(rej->code, rej->reason);
        continue;
      }
      batch.push_back(std::get<Observation>(std::move(result)));
      if (batch.size() == kMaxBatchSize) flush();
    }
    flush();
  }
  json out = {{"patients", patients}, {"accepted", accepted}, {"duplicates", duplicates},
              {"conflicts", conflicts}, {"rejected", rejected}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_analyze(const Globals& g, const std::string& patient, const std::string& learning_end) {
  auto cfg = load_settings(g);
  auto store = open_store(cfg);
  std::optional<Date> boundary;
  if (!learning_end.empty()) boundary = parse_date_arg(learning_end, "--learning-end");
  auto snap = store.snapshot();
  std::cout << triggers_json(snap, patient, boundary, cfg.params).dump(2) << "\n";
  return 0;
}

int cmd_simulate(const Globals& g, const std::string& season_name, int patients,
                 std::uint64_t seed, const std::string& out, bool into_store) {
  auto season = parse_season(season_name);
  if (!season) throw Error(ErrorCode::config_error, fmt::format("unknown season {}", season_name));
  CohortSpec spec;
  spec.season = *season;
  spec.patients = patients;
  spec.seed = seed;
  auto cohort = simulate_cohort(spec);
  if (into_store) {
    auto cfg = load_settings(g);
    auto store = open_store(cfg);
    cohort.load_into(store);
    std::cerr << fmt::format("loaded {} patients into {}\n", cohort.truth.size(),
                             cfg.store_path.string());
    if (out.empty()) return 0;
  }
  write_output(out, cohort.to_ndjson());
  return 0;
}

int cmd_report(const Globals& g, const std::string& patient, const std::vector<std::string>& seasons,
               const std::string& format, const std::string& learning_end, int learning_days,
               bool no_pollen_split) {
  auto cfg = load_settings(g);
  auto store = open_store(cfg);
  auto snap = store.snapshot();
  std::vector<std::pair<std::string, Table>> tables;
  std::string title;
  if (!patient.empty()) {
    ReportOptions opts;
    if (!learning_end.empty()) opts.learning_end = parse_date_arg(learning_end, "--learning-end");
    if (learning_days > 0) opts.learning_days = learning_days;
    opts.split_by_pollen = !no_pollen_split;
    auto report = build_patient_report(snap, patient, cfg.params, opts);
    tables = report_tables(report);
    title = fmt::format("Trigger report for {}", patient);
  } else {
    std::vector<CohortSummary> summaries;
    std::vector<CohortMember> members;
    for (auto& p : snap.patients()) members.push_back(cohort_member(snap, p.patient_id, cfg.params));
    for (auto& name : seasons) {
      auto s = parse_season(name);
      if (!s) throw Error(ErrorCode::config_error, fmt::format("unknown season {}", name));
      summaries.push_back(cohort_summary(*s, members));
    }
    tables = cohort_tables(summaries);
    title = "Cohort trigger report";
  }
  std::cout << (format == "csv" ? render_csv(tables) : render_markdown(title, tables));
  return 0;
}

int cmd_export(const Globals& g, const std::string& stream_name, bool no_profiles,
               const std::string& out) {
  auto cfg = load_settings(g);
  auto store = open_store(cfg);
  std::optional<Stream> stream;
  if (!stream_name.empty()) {
    stream = parse_stream(stream_name);
    if (!stream) throw Error(ErrorCode::config_error, fmt::format("unknown stream {}", stream_name));
  }
  write_output(out, store.snapshot().export_ndjson(stream, !no_profiles));
  return 0;
}

int cmd_alerts(const Globals& g, const std::string& patient, const std::string& date,
               bool list_only) {
  auto cfg = load_settings(g);
  auto store = open_store(cfg);
  json out = json::array();
  if (list_only) {
    std::optional<std::string> who;
    if (!patient.empty()) who = patient;
    for (auto& a : store.snapshot().alerts(who, std::nullopt)) out.push_back(alert_to_json(a));
  } else {
    if (patient.empty() || date.empty()) {
      throw Error(ErrorCode::config_error, "--patient and --date are required to evaluate alerts");
    }
    for (auto& a : run_alerts(store, patient, parse_date_arg(date, "--date"), cfg.params)) {
      out.push_back(alert_to_json(a));
    }
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_fetch(const Globals& g, const std::string& sources, const std::string& until) {
  auto cfg = load_settings(g);
  auto store = open_store(cfg);
  auto fc = load_fetcher_config(sources);
  Timestamp end;
  try {
    end = parse_timestamp(until);
  } catch (const std::exception&) {
    throw Error(ErrorCode::config_error, fmt::format("--until must be RFC 3339, got {}", until));
  }
  EnvFetcher fetcher(store, make_plan(fc.sources, fc.start));
  std::map<std::string, std::shared_ptr<FixtureAdapter>> by_file;
  for (auto& s : fc.sources) {
    auto& adapter = by_file[s.fixture.string()];
    if (!adapter) adapter = std::make_shared<FixtureAdapter>(s.fixture);
    fetcher.set_adapter(s.source, adapter);
  }
  auto stats = fetcher.run_until(end);
  std::cout << json{{"polls", stats.polls}, {"samples", stats.samples}, {"stored", stats.stored},
                    {"failures", stats.failures}}.dump(2)
            << "\n";
  return stats.failures > 0 ? kExitData : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asthma trigger monitoring: ingest, analysis, simulation and reports"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path,
                 fmt::format("JSON config file (default: ${})", kConfigEnvVar));
  app.add_option("--store", g.store_path, "SQLite store file (overrides the config)");
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");

  std::function<int()> run;

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string host;
  int port = -1;
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free one)");
  serve->callback([&] { run = [&] { return cmd_serve(g, host, port); }; });

  auto* ingest = app.add_subcommand("ingest", "Load NDJSON files (profiles and observations)");
  std::vector<std::string> files;
  ingest->add_option("files", files, "NDJSON files, - for stdin")->required();
  ingest->callback([&] { run = [&] { return cmd_ingest(g, files); }; });

  auto* analyze = app.add_subcommand("analyze", "Learning/prediction trigger analysis as JSON");
  std::string patient, learning_end;
  analyze->add_option("--patient", patient, "Patient id")->required();
  analyze->add_option("--learning-end", learning_end, "First prediction day (YYYY-MM-DD)");
  analyze->callback([&] { run = [&] { return cmd_analyze(g, patient, learning_end); }; });

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic cohort as NDJSON");
  std::string season = "winter", out;
  int patients = 10;
  std::uint64_t seed = 1;
  bool into_store = false;
  simulate->add_option("--season", season, "winter, spring, summer or fall");
  simulate->add_option("--patients", patients, "Cohort size")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "Seed");
  simulate->add_option("--out", out, "Output file (default stdout)");
  simulate->add_flag("--into-store", into_store, "Load the cohort into the store as well");
  simulate->callback([&] {
    run = [&] { return cmd_simulate(g, season, patients, seed, out, into_store); };
  });

  auto* report = app.add_subcommand("report", "Markdown or CSV trigger tables");
  std::vector<std::string> seasons;
  std::string format = "markdown";
  int learning_days = 0;
  bool no_pollen_split = false;
  auto* rp = report->add_option("--patient", patient, "Patient id");
  auto* rs = report->add_option("--season", seasons, "Season(s) for the cohort table");
  rp->excludes(rs);
  report->add_option("--format", format, "markdown or csv")
      ->check(CLI::IsMember({"markdown", "csv"}));
  report->add_option("--learning-end", learning_end, "First prediction day (YYYY-MM-DD)");
  report->add_option("--learning-days", learning_days, "Learning days per analyzed segment");
  report->add_flag("--no-pollen-split", no_pollen_split, "Do not split by pollen presence");
  report->callback([&] {
    if (patient.empty() && seasons.empty()) {
      throw CLI::ValidationError("report", "--patient or --season is required");
    }
    run = [&] {
      return cmd_report(g, patient, seasons, format, learning_end, learning_days,
                        no_pollen_split);
    };
  });

  auto* exp = app.add_subcommand("export", "Canonical NDJSON dump of the store");
  std::string stream;
  bool no_profiles = false;
  exp->add_option("--stream", stream, "Only this stream");
  exp->add_flag("--no-profiles", no_profiles, "Omit patient profiles");
  exp->add_option("--out", out, "Output file (default stdout)");
  exp->callback([&] { run = [&] { return cmd_export(g, stream, no_profiles, out); }; });

  auto* alerts = app.add_subcommand("alerts", "Evaluate and store alerts for a patient-day");
  std::string date;
  bool list_only = false;
  alerts->add_option("--patient", patient, "Patient id");
  alerts->add_option("--date", date, "Evaluation date (YYYY-MM-DD)");
  alerts->add_flag("--list", list_only, "List stored alerts instead");
  alerts->callback([&] { run = [&] { return cmd_alerts(g, patient, date, list_only); }; });

  auto* fetch = app.add_subcommand("fetch", "Poll environmental fixtures into the store");
  std::string sources, until;
  fetch->add_option("--sources", sources, "Fetcher config (JSON)")->required();
  fetch->add_option("--until", until, "Poll up to this instant (RFC 3339)")->required();
  fetch->callback([&] { run = [&] { return cmd_fetch(g, sources, until); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("airway"));
  spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::warn);
  try {
    return run ? run() : 0;
  } catch (const Error& e) {
    std::cerr << fmt::format("error: {}: {}\n", to_string(e.code()), e.what());
    return e.code() == ErrorCode::config_error ? kExitConfig : kExitData;
  } catch (const std::exception& e) {
    std::cerr << fmt::format("error: {}\n", e.what());
    return kExitData;
  }
}
