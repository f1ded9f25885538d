#ifndef CTSIM_RUN_IO_HPP
#define CTSIM_RUN_IO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctsim/orchestrator.hpp"
#include "ctsim/synthdata.hpp"

namespace ctsim {

/// Declarative run description: data source, scenario selection, windows,
/// seeds, and monitor/trainer overrides.
struct RunConfig {
  std::string corpus_path;      // exactly one of corpus_path /
  std::string drift_spec_path;  // drift_spec_path is set
  std::vector<int> rows;        // canonical scenario numbers, 1..12
  struct CustomScenario {
    SplitStrategy split = SplitStrategy::stratified;
    FinetuneMode finetune = FinetuneMode::incremental;
    InclusionPolicy inclusion = InclusionPolicy::new_only;
    ScheduleKind schedule = ScheduleKind::threshold;
  };
  std::vector<CustomScenario> custom;  // requires allow_free_composition
  bool allow_free_composition = false;
  Date research_cutoff;
  Date monitoring_end;
  uint64_t seed = 0;
  uint32_t workers = 1;
  uint32_t feature_dimension = 8192;
  double carryover_fraction = 0.5;
  SplitRatio ratio = SplitRatio::standard();
  MonitorConfig monitor;
  TrainOptions train_options;

  void validate() const;
  static RunConfig from_json_file(const std::string& path);

  /// Scenario list implied by rows + custom entries. Custom scenarios get
  /// numbers 101, 102, ... so summary rows stay unambiguous.
  std::vector<ScenarioConfig> scenarios() const;
};

struct RunResult {
  size_t scenario_count = 0;
  size_t failure_count = 0;
  std::vector<ScenarioOutcome> outcomes;
};

/// Loads or generates the corpus, runs every scenario, and writes all run
/// artifacts under out_dir: matrix_summary.csv plus per-scenario
/// monitoring.csv, retraining_events.csv, skipped_triggers.csv,
/// run_report.json and split manifests.
RunResult execute_run(const RunConfig& config, const std::string& out_dir,
                      std::optional<uint64_t> seed_override = std::nullopt,
                      std::optional<uint32_t> workers_override = std::nullopt,
                      bool track_access = false);

/// Merges a completed run directory into one long-format CSV
/// (scenario_no, week_end, score), returning the number of scenarios whose
/// artifacts were missing or marked failed. Weeks with absent scores are
/// skipped.
size_t merge_report(const std::string& run_dir, const std::string& out_csv);

}  // namespace ctsim

#endif
