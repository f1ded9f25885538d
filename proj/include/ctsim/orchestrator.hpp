#ifndef CTSIM_ORCHESTRATOR_HPP
#define CTSIM_ORCHESTRATOR_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctsim/allocation.hpp"
#include "ctsim/corpus.hpp"
#include "ctsim/monitor.hpp"
#include "ctsim/splitter.hpp"
#include "ctsim/trainer.hpp"

namespace ctsim {

/// One cell of the retraining design matrix: split strategy x finetuning
/// strategy x new-data inclusion x schedule, plus the simulation window.
struct ScenarioConfig {
  int scenario_no = 0;  // 1..12 for the canonical matrix rows, 0 for custom
  SplitStrategy split_strategy = SplitStrategy::stratified;
  FinetuneMode finetune = FinetuneMode::incremental;
  InclusionPolicy inclusion = InclusionPolicy::new_only;
  ScheduleKind schedule = ScheduleKind::threshold;
  Date research_cutoff;
  Date monitoring_end;
  uint64_t seed = 0;
  double carryover_fraction = 0.5;  // x, stratified new_plus_old only
  SplitRatio ratio = SplitRatio::standard();
  MonitorConfig monitor;
  TrainOptions train_options;
  uint32_t feature_dimension = 8192;
  /// The canonical matrix pairs new_plus_all_old exclusively with
  /// cumulative/checkpoint finetuning; free composition lifts the
  /// twelve-row restriction but keeps that pairing rule.
  bool allow_free_composition = false;

  void validate() const;
};

/// The twelve canonical scenarios, numbered 1..12.
std::vector<ScenarioConfig> canonical_scenarios(Date research_cutoff, Date monitoring_end,
                                                uint64_t run_seed);
/// One canonical row (1..12) with windows and a per-scenario derived seed.
ScenarioConfig canonical_scenario(int row, Date research_cutoff, Date monitoring_end,
                                  uint64_t run_seed);

struct RetrainingEvent {
  Date trigger_date;
  std::string trigger_reason;  // "threshold" or "fixed_interval"
  uint64_t new_docs = 0;
  uint64_t train_size = 0;       // documents actually trained on
  uint64_t validation_size = 0;
  uint64_t test_size = 0;
  double challenger_score = 0;
  double champion_score = 0;  // deployed model, same test set
  bool promoted = false;
  TrainingBudget budget;
};

struct SkippedTrigger {
  Date date;
  std::string reason;
};

/// Why and what the simulator touched, for hygiene audits. Every document
/// materialization inside a scenario run flows through the time gate that
/// fills this in; reads past the simulated clock throw instead of recording.
struct AccessLog {
  struct TrainingAccess {
    int event_index;  // -1 = initial champion training
    std::vector<uint32_t> train_docs;      // corpus indices
    std::vector<uint32_t> validation_docs;
    std::vector<uint32_t> test_docs;
    Date sim_date;
  };
  std::vector<TrainingAccess> trainings;
  uint64_t range_queries = 0;
  Date max_timestamp_seen;  // latest document timestamp ever materialized
  Date max_sim_date;        // latest simulated clock value
};

struct RunReport {
  ScenarioConfig scenario;
  std::vector<WeeklyRecord> weekly;
  std::vector<RetrainingEvent> events;
  std::vector<SkippedTrigger> skipped;
  double champion_initial_score = 0;
  double champion_training_seconds = 0;
  /// Mean of the non-absent weekly window scores.
  double avg_monitoring_performance = 0;
  /// Sum of retraining budgets; the initial champion training is excluded.
  double total_retraining_seconds = 0;
  uint32_t retraining_count = 0;
  /// Lineage: research split first, then one split per retraining event.
  std::vector<std::shared_ptr<const DataSplit>> splits;
  std::shared_ptr<const AccessLog> access;  // present when tracking was on
};

/// Replays one scenario over the corpus: research split, champion training,
/// weekly monitoring, and the trigger/allocate/train/compare/promote loop,
/// until monitoring_end. Documents are revealed strictly by simulated date.
RunReport run_scenario(const ScenarioConfig& config, const Corpus& corpus,
                       const FeatureCache& cache, bool track_access = false);

struct ScenarioOutcome {
  std::optional<RunReport> report;  // empty on failure
  std::string error;                // empty on success
};

/// Independent scenario runs, up to `workers` in parallel. Outcomes are
/// returned in the input order; one scenario's failure never aborts siblings.
std::vector<ScenarioOutcome> run_matrix(std::span<const ScenarioConfig> scenarios,
                                        const Corpus& corpus, const FeatureCache& cache,
                                        uint32_t workers, bool track_access = false);

}  // namespace ctsim

#endif
