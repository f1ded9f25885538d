#include "ctsim/run_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ctsim/csv.hpp"
#include "ctsim/error.hpp"
#include "ctsim/rng.hpp"

namespace fs = std::filesystem;

namespace ctsim {

namespace csv {
std::vector<std::vector<std::string>> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open CSV file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}
}  // namespace csv

void RunConfig::validate() const {
  if (corpus_path.empty() == drift_spec_path.empty()) {
    throw ValidationError("run config needs exactly one data source: "
                          "'corpus' or 'drift_spec'");
  }
  if (rows.empty() && custom.empty()) {
    throw ValidationError("run config selects no scenarios");
  }
  for (int row : rows) {
    if (row < 1 || row > 12) {
      throw ValidationError("scenario rows are numbered 1..12, got " + std::to_string(row));
    }
  }
  if (!custom.empty() && !allow_free_composition) {
    throw ValidationError("custom scenarios require allow_free_composition: true");
  }
  if (!(research_cutoff < monitoring_end)) {
    throw ValidationError("research_cutoff must precede monitoring_end");
  }
  ratio.validate();
  monitor.validate();
}

std::vector<ScenarioConfig> RunConfig::scenarios() const {
  std::vector<ScenarioConfig> out;
  out.reserve(rows.size() + custom.size());
  for (int row : rows) {
    ScenarioConfig s = canonical_scenario(row, research_cutoff, monitoring_end, seed);
    s.ratio = ratio;
    s.monitor = monitor;
    s.monitor.schedule = s.schedule;
    s.train_options = train_options;
    s.feature_dimension = feature_dimension;
    s.carryover_fraction = carryover_fraction;
    out.push_back(std::move(s));
  }
  int next_no = 101;
  for (const auto& c : custom) {
    ScenarioConfig s;
    s.scenario_no = next_no++;
    s.split_strategy = c.split;
    s.finetune = c.finetune;
    s.inclusion = c.inclusion;
    s.schedule = c.schedule;
    s.research_cutoff = research_cutoff;
    s.monitoring_end = monitoring_end;
    s.seed = derive_seed(seed, "scenario:" + std::to_string(s.scenario_no));
    s.ratio = ratio;
    s.monitor = monitor;
    s.monitor.schedule = c.schedule;
    s.train_options = train_options;
    s.feature_dimension = feature_dimension;
    s.carryover_fraction = carryover_fraction;
    s.allow_free_composition = true;
    out.push_back(std::move(s));
  }
  return out;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open run config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid run config JSON in " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError("run config must be a JSON object");

  RunConfig config;
  if (j.contains("corpus")) config.corpus_path = j["corpus"].get<std::string>();
  if (j.contains("drift_spec")) config.drift_spec_path = j["drift_spec"].get<std::string>();
  if (j.contains("scenarios")) {
    for (const auto& entry : j["scenarios"]) {
      if (entry.is_number_integer()) {
        config.rows.push_back(entry.get<int>());
      } else if (entry.is_object()) {
        RunConfig::CustomScenario c;
        c.split = split_strategy_from_string(entry.at("split").get<std::string>());
        c.finetune = finetune_from_string(entry.at("finetune").get<std::string>());
        c.inclusion = inclusion_from_string(entry.at("inclusion").get<std::string>());
        c.schedule = schedule_from_string(entry.at("schedule").get<std::string>());
        config.custom.push_back(c);
      } else {
        throw ParseError("scenario entries must be row numbers or objects");
      }
    }
  }
  if (j.contains("allow_free_composition")) {
    config.allow_free_composition = j["allow_free_composition"].get<bool>();
  }
  if (!j.contains("research_cutoff") || !j.contains("monitoring_end")) {
    throw ParseError("run config needs research_cutoff and monitoring_end dates");
  }
  config.research_cutoff = Date::parse(j["research_cutoff"].get<std::string>());
  config.monitoring_end = Date::parse(j["monitoring_end"].get<std::string>());
  if (j.contains("seed")) config.seed = j["seed"].get<uint64_t>();
  if (j.contains("workers")) config.workers = j["workers"].get<uint32_t>();
  if (j.contains("feature_dimension")) {
    config.feature_dimension = j["feature_dimension"].get<uint32_t>();
  }
  if (j.contains("carryover_fraction")) {
    config.carryover_fraction = j["carryover_fraction"].get<double>();
  }
  if (j.contains("ratio")) {
    const auto& r = j["ratio"];
    config.ratio.train = r.at("train").get<double>();
    config.ratio.validation = r.at("validation").get<double>();
    config.ratio.test = r.at("test").get<double>();
  }
  if (j.contains("monitor")) {
    const auto& m = j["monitor"];
    if (m.contains("window_weeks")) config.monitor.window_weeks = m["window_weeks"].get<uint32_t>();
    if (m.contains("cadence_weeks")) config.monitor.cadence_weeks = m["cadence_weeks"].get<uint32_t>();
    if (m.contains("relative_drop")) config.monitor.relative_drop = m["relative_drop"].get<double>();
    if (m.contains("consecutive_breaches_required")) {
      config.monitor.consecutive_breaches_required =
          m["consecutive_breaches_required"].get<uint32_t>();
    }
    if (m.contains("fixed_interval_months")) {
      config.monitor.fixed_interval_months = m["fixed_interval_months"].get<uint32_t>();
    }
  }
  if (j.contains("trainer")) {
    const auto& t = j["trainer"];
    if (t.contains("learning_rate")) config.train_options.learning_rate = t["learning_rate"].get<double>();
    if (t.contains("batch_size")) config.train_options.batch_size = t["batch_size"].get<uint32_t>();
    if (t.contains("max_epochs")) config.train_options.max_epochs = t["max_epochs"].get<uint32_t>();
    if (t.contains("evals_per_epoch")) config.train_options.evals_per_epoch = t["evals_per_epoch"].get<uint32_t>();
    if (t.contains("early_stop_patience")) {
      config.train_options.early_stop_patience = t["early_stop_patience"].get<uint32_t>();
    }
    if (t.contains("early_stop_min_delta")) {
      config.train_options.early_stop_min_delta = t["early_stop_min_delta"].get<double>();
    }
  }
  config.validate();
  return config;
}

namespace {

std::string scenario_dir_name(int scenario_no) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scenario_%02d", scenario_no);
  return buf;
}

std::string opt_double(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : std::string();
}

std::string opt_bool(const std::optional<bool>& v) {
  return v ? std::string(*v ? "true" : "false") : std::string();
}

void write_monitoring_csv(const fs::path& path, const RunReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  csv::Writer w(out);
  w.row({"week_end", "window_size", "window_score", "threshold", "breached", "streak",
         "decision"});
  for (const auto& rec : report.weekly) {
    w.row({rec.week_end.to_string(), std::to_string(rec.window_size), opt_double(rec.score),
           csv::format_double(rec.threshold), opt_bool(rec.breached),
           std::to_string(rec.streak), rec.triggered ? "trigger_retraining" : "none"});
  }
}

void write_events_csv(const fs::path& path, const RunReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  csv::Writer w(out);
  w.row({"trigger_date", "trigger_reason", "new_docs", "train_size", "validation_size",
         "test_size", "challenger_score", "champion_score", "promoted", "wall_seconds",
         "epochs_run", "examples_seen"});
  for (const auto& e : report.events) {
    w.row({e.trigger_date.to_string(), e.trigger_reason, std::to_string(e.new_docs),
           std::to_string(e.train_size), std::to_string(e.validation_size),
           std::to_string(e.test_size), csv::format_double(e.challenger_score),
           csv::format_double(e.champion_score), e.promoted ? "true" : "false",
           csv::format_double(e.budget.wall_clock_seconds),
           std::to_string(e.budget.epochs_run), std::to_string(e.budget.examples_seen)});
  }
}

void write_skipped_csv(const fs::path& path, const RunReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  csv::Writer w(out);
  w.row({"date", "reason"});
  for (const auto& s : report.skipped) {
    w.row({s.date.to_string(), s.reason});
  }
}

void write_split_manifests(const fs::path& dir, const RunReport& report) {
  fs::create_directories(dir);
  for (size_t i = 0; i < report.splits.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "split_%03zu.json", i);
    auto manifest = report.splits[i]->to_manifest();
    if (i == 0) {
      manifest["parent_manifest"] = nullptr;
    } else {
      char parent[32];
      std::snprintf(parent, sizeof(parent), "split_%03zu.json", i - 1);
      manifest["parent_manifest"] = parent;
    }
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw IoError("cannot write split manifest " + (dir / name).string());
    out << manifest.dump(2) << '\n';
  }
}

void write_report_json(const fs::path& path, const RunReport& report) {
  nlohmann::ordered_json j;
  j["scenario_no"] = report.scenario.scenario_no;
  j["data_split"] = to_string(report.scenario.split_strategy);
  j["finetuning"] = to_string(report.scenario.finetune);
  j["inclusion"] = to_string(report.scenario.inclusion);
  j["schedule"] = to_string(report.scenario.schedule);
  j["seed"] = report.scenario.seed;
  j["research_cutoff"] = report.scenario.research_cutoff.to_string();
  j["monitoring_end"] = report.scenario.monitoring_end.to_string();
  j["champion_initial_score"] = report.champion_initial_score;
  j["champion_training_seconds"] = report.champion_training_seconds;
  j["avg_monitoring_performance"] = report.avg_monitoring_performance;
  j["total_retraining_seconds"] = report.total_retraining_seconds;
  j["retraining_count"] = report.retraining_count;
  j["skipped_triggers"] = report.skipped.size();
  j["monitored_weeks"] = report.weekly.size();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

RunResult execute_run(const RunConfig& config, const std::string& out_dir,
                      std::optional<uint64_t> seed_override,
                      std::optional<uint32_t> workers_override, bool track_access) {
  config.validate();
  RunConfig effective = config;
  if (seed_override) effective.seed = *seed_override;
  if (workers_override) effective.workers = *workers_override;

  Corpus corpus = effective.corpus_path.empty()
                      ? generate(DriftSpec::from_json_file(effective.drift_spec_path))
                      : Corpus::load_jsonl(effective.corpus_path);
  FeatureCache cache(corpus, effective.feature_dimension);

  auto scenario_list = effective.scenarios();
  auto outcomes =
      run_matrix(scenario_list, corpus, cache, effective.workers, track_access);

  fs::create_directories(out_dir);

  // Emit per-scenario artifacts, sorted by scenario number.
  std::vector<size_t> order(outcomes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return scenario_list[a].scenario_no < scenario_list[b].scenario_no;
  });

  std::ofstream summary_out(fs::path(out_dir) / "matrix_summary.csv", std::ios::binary);
  if (!summary_out) throw IoError("cannot write matrix_summary.csv under " + out_dir);
  csv::Writer summary(summary_out);
  summary.row({"scenario_no", "data_split", "finetuning", "inclusion", "schedule",
               "retraining_time_s", "retraining_count", "avg_monitoring_performance"});

  RunResult result;
  result.scenario_count = outcomes.size();
  for (size_t idx : order) {
    const ScenarioConfig& scenario = scenario_list[idx];
    const ScenarioOutcome& outcome = outcomes[idx];
    fs::path dir = fs::path(out_dir) / scenario_dir_name(scenario.scenario_no);
    fs::create_directories(dir);
    if (!outcome.report) {
      ++result.failure_count;
      std::ofstream err(dir / "error.txt", std::ios::binary);
      err << outcome.error << '\n';
      continue;
    }
    const RunReport& report = *outcome.report;
    write_monitoring_csv(dir / "monitoring.csv", report);
    write_events_csv(dir / "retraining_events.csv", report);
    write_skipped_csv(dir / "skipped_triggers.csv", report);
    write_split_manifests(dir / "splits", report);
    write_report_json(dir / "run_report.json", report);
    summary.row({std::to_string(scenario.scenario_no), to_string(scenario.split_strategy),
                 to_string(scenario.finetune), to_string(scenario.inclusion),
                 to_string(scenario.schedule),
                 csv::format_double(report.total_retraining_seconds),
                 std::to_string(report.retraining_count),
                 csv::format_double(report.avg_monitoring_performance)});
  }
  result.outcomes = std::move(outcomes);
  return result;
}

size_t merge_report(const std::string& run_dir, const std::string& out_csv) {
  if (!fs::exists(fs::path(run_dir) / "matrix_summary.csv")) {
    throw ValidationError("not a completed run directory (no matrix_summary.csv): " +
                          run_dir);
  }
  std::vector<fs::path> scenario_dirs;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("scenario_", 0) == 0) {
      scenario_dirs.push_back(entry.path());
    }
  }
  std::sort(scenario_dirs.begin(), scenario_dirs.end());

  std::ofstream out(out_csv, std::ios::binary);
  if (!out) throw IoError("cannot write " + out_csv);
  csv::Writer w(out);
  w.row({"scenario_no", "week_end", "score"});

  size_t missing = 0;
  for (const auto& dir : scenario_dirs) {
    const std::string scenario_no = dir.filename().string().substr(std::string("scenario_").size());
    fs::path monitoring = dir / "monitoring.csv";
    if (!fs::exists(monitoring)) {
      ++missing;
      continue;
    }
    auto rows = csv::read_file(monitoring.string());
    // Normalized scenario number: "scenario_01" -> "1".
    std::string number = std::to_string(std::stoi(scenario_no));
    for (size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() < 3 || rows[i][2].empty()) continue;  // absent score
      w.row({number, rows[i][0], rows[i][2]});
    }
  }
  return missing;
}

}  // namespace ctsim
