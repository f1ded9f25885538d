#include "ctsim/orchestrator.hpp"

#include <algorithm>
#include <future>
#include <semaphore>
#include <unordered_set>

#include "ctsim/error.hpp"
#include "ctsim/metrics.hpp"
#include "ctsim/rng.hpp"

namespace ctsim {

void ScenarioConfig::validate() const {
  ratio.validate();
  monitor.validate();
  if (!(research_cutoff < monitoring_end)) {
    throw ValidationError("research cutoff must precede monitoring end");
  }
  if (!(carryover_fraction > 0.0 && carryover_fraction < 1.0)) {
    throw ValidationError("carryover fraction x must lie in (0,1)");
  }
  if (inclusion == InclusionPolicy::new_plus_all_old &&
      finetune == FinetuneMode::incremental) {
    throw ValidationError(
        "new_plus_all_old inclusion requires cumulative or checkpoint finetuning");
  }
  if (!allow_free_composition) {
    bool canonical = false;
    for (int row = 1; row <= 12; ++row) {
      ScenarioConfig ref = canonical_scenario(row, research_cutoff, monitoring_end, seed);
      if (ref.split_strategy == split_strategy && ref.finetune == finetune &&
          ref.inclusion == inclusion && ref.schedule == schedule) {
        canonical = true;
        break;
      }
    }
    if (!canonical) {
      throw ValidationError(
          "scenario is not one of the 12 canonical rows; "
          "set allow_free_composition to run it anyway");
    }
  }
}

ScenarioConfig canonical_scenario(int row, Date research_cutoff, Date monitoring_end,
                                  uint64_t run_seed) {
  if (row < 1 || row > 12) {
    throw ValidationError("canonical scenario rows are numbered 1..12, got " +
                          std::to_string(row));
  }
  struct Row {
    SplitStrategy split;
    FinetuneMode finetune;
    InclusionPolicy inclusion;
    ScheduleKind schedule;
  };
  static const Row kRows[12] = {
      {SplitStrategy::stratified, FinetuneMode::incremental, InclusionPolicy::new_only,
       ScheduleKind::threshold},
      {SplitStrategy::stratified, FinetuneMode::incremental, InclusionPolicy::new_only,
       ScheduleKind::fixed_interval},
      {SplitStrategy::stratified, FinetuneMode::incremental, InclusionPolicy::new_plus_old,
       ScheduleKind::threshold},
      {SplitStrategy::stratified, FinetuneMode::incremental, InclusionPolicy::new_plus_old,
       ScheduleKind::fixed_interval},
      {SplitStrategy::stratified, FinetuneMode::cumulative, InclusionPolicy::new_plus_all_old,
       ScheduleKind::fixed_interval},
      {SplitStrategy::stratified, FinetuneMode::checkpoint, InclusionPolicy::new_plus_all_old,
       ScheduleKind::fixed_interval},
      {SplitStrategy::chronological, FinetuneMode::incremental, InclusionPolicy::new_only,
       ScheduleKind::threshold},
      {SplitStrategy::chronological, FinetuneMode::incremental, InclusionPolicy::new_only,
       ScheduleKind::fixed_interval},
      {SplitStrategy::chronological, FinetuneMode::incremental, InclusionPolicy::new_plus_old,
       ScheduleKind::threshold},
      {SplitStrategy::chronological, FinetuneMode::incremental, InclusionPolicy::new_plus_old,
       ScheduleKind::fixed_interval},
      {SplitStrategy::chronological, FinetuneMode::cumulative,
       InclusionPolicy::new_plus_all_old, ScheduleKind::fixed_interval},
      {SplitStrategy::chronological, FinetuneMode::checkpoint,
       InclusionPolicy::new_plus_all_old, ScheduleKind::fixed_interval},
  };
  ScenarioConfig config;
  config.scenario_no = row;
  const Row& r = kRows[row - 1];
  config.split_strategy = r.split;
  config.finetune = r.finetune;
  config.inclusion = r.inclusion;
  config.schedule = r.schedule;
  config.research_cutoff = research_cutoff;
  config.monitoring_end = monitoring_end;
  config.seed = derive_seed(run_seed, "scenario:" + std::to_string(row));
  return config;
}

std::vector<ScenarioConfig> canonical_scenarios(Date research_cutoff, Date monitoring_end,
                                                uint64_t run_seed) {
  std::vector<ScenarioConfig> out;
  out.reserve(12);
  for (int row = 1; row <= 12; ++row) {
    out.push_back(canonical_scenario(row, research_cutoff, monitoring_end, run_seed));
  }
  return out;
}

namespace {

/// Time-gated corpus view. All document materialization inside a scenario
/// goes through it, so a read past the simulated clock is impossible by
/// construction rather than by convention.
class TimeGate {
 public:
  TimeGate(const Corpus& corpus, AccessLog* log) : corpus_(corpus), log_(log) {}

  void advance(Date now) {
    now_ = now;
    if (log_ && now > log_->max_sim_date) log_->max_sim_date = now;
  }
  Date now() const { return now_; }

  /// Documents in [from, to). Requires to <= now.
  std::span<const Document> range(Date from, Date to) {
    if (now_ < to) {
      throw Error("temporal hygiene violation: requested documents up to " + to.to_string() +
                  " at simulated date " + now_.to_string());
    }
    auto docs = corpus_.slice(from, to);
    if (log_) {
      ++log_->range_queries;
      if (!docs.empty()) {
        Date last = docs.back().timestamp;
        if (last > log_->max_timestamp_seen) log_->max_timestamp_seen = last;
      }
    }
    return docs;
  }

  /// Resolves split ids to documents, enforcing the clock per document.
  std::vector<const Document*> resolve(const std::vector<std::string>& ids) {
    std::vector<const Document*> docs;
    docs.reserve(ids.size());
    for (const auto& id : ids) {
      auto idx = corpus_.find(id);
      if (!idx) {
        throw ValidationError("split references unknown document id '" + id + "'");
      }
      const Document& d = corpus_.documents()[*idx];
      if (!(d.timestamp < now_)) {
        throw Error("temporal hygiene violation: document '" + id + "' dated " +
                    d.timestamp.to_string() + " materialized at simulated date " +
                    now_.to_string());
      }
      if (log_ && d.timestamp > log_->max_timestamp_seen) {
        log_->max_timestamp_seen = d.timestamp;
      }
      docs.push_back(&d);
    }
    return docs;
  }

  std::vector<uint32_t> indices_of(const std::vector<const Document*>& docs) const {
    std::vector<uint32_t> out;
    out.reserve(docs.size());
    const Document* base = corpus_.documents().data();
    for (const Document* d : docs) {
      out.push_back(static_cast<uint32_t>(d - base));
    }
    return out;
  }

 private:
  const Corpus& corpus_;
  AccessLog* log_;
  Date now_;
};

std::vector<const Document*> to_pointers(std::span<const Document> docs) {
  return doc_pointers(docs);
}

double test_weighted_f1(const ModelState& model, const std::vector<const Document*>& docs,
                        const Corpus& corpus, const FeatureCache& cache,
                        const LabelSpace& space) {
  std::vector<LabelSet> preds(docs.size());
  std::vector<LabelSet> gold(docs.size());
  const Document* base = corpus.documents().data();
  for (size_t i = 0; i < docs.size(); ++i) {
    const size_t idx = static_cast<size_t>(docs[i] - base);
    preds[i] = predict(model, cache[idx]);
    gold[i] = corpus.label_ids(idx);
  }
  return evaluate(preds, gold, space).weighted_f1;
}

/// The ids a split's train set contributes to the cumulative history.
void absorb_ids(std::unordered_set<std::string>& into, const std::vector<std::string>& ids) {
  into.insert(ids.begin(), ids.end());
}

void assert_no_leak(const std::vector<const Document*>& train_docs, const DataSplit& split) {
  std::unordered_set<std::string_view> held_out;
  held_out.reserve(split.validation.size() + split.test.size());
  for (const auto& id : split.validation) held_out.insert(id);
  for (const auto& id : split.test) held_out.insert(id);
  for (const Document* d : train_docs) {
    if (held_out.count(d->id)) {
      throw Error("leakage: document '" + d->id +
                  "' scheduled for training while held out by the active split");
    }
  }
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& config, const Corpus& corpus,
                       const FeatureCache& cache, bool track_access) {
  config.validate();
  if (corpus.empty()) throw ValidationError("cannot run a scenario on an empty corpus");
  if (!(corpus.min_date() < config.research_cutoff)) {
    throw ValidationError("corpus has no documents before the research cutoff");
  }
  if (cache.dimension() != config.feature_dimension) {
    throw ValidationError("feature cache dimension does not match the scenario");
  }

  RunReport report;
  report.scenario = config;
  auto log = track_access ? std::make_shared<AccessLog>() : nullptr;

  TimeGate gate(corpus, log.get());
  gate.advance(config.research_cutoff);

  // Research phase: split everything before the cutoff, train the champion.
  auto research_docs = to_pointers(gate.range(corpus.min_date(), config.research_cutoff));
  auto research_split = std::make_shared<DataSplit>(
      config.split_strategy == SplitStrategy::stratified
          ? iterative_stratified_split(research_docs, corpus.label_space(), config.ratio,
                                       derive_seed(config.seed, "split:0"))
          : chronological_split(research_docs, config.ratio));
  report.splits.push_back(research_split);

  TrainOptions train_options = config.train_options;
  train_options.seed = derive_seed(config.seed, "train:0");

  auto train_docs = gate.resolve(research_split->train);
  auto val_docs = gate.resolve(research_split->validation);
  auto test_docs = gate.resolve(research_split->test);
  assert_no_leak(train_docs, *research_split);
  if (log) {
    log->trainings.push_back({-1, gate.indices_of(train_docs), gate.indices_of(val_docs),
                              gate.indices_of(test_docs), gate.now()});
  }

  TrainResult champion = train(nullptr, train_docs, val_docs, corpus.label_space(),
                               config.feature_dimension, train_options, &corpus, &cache);
  report.champion_training_seconds = champion.budget.wall_clock_seconds;
  report.champion_initial_score =
      test_weighted_f1(champion.model, test_docs, corpus, cache, corpus.label_space());

  MonitorState monitor_state;
  monitor_state.baseline = report.champion_initial_score;

  std::unordered_set<std::string> historical_train_ids;
  absorb_ids(historical_train_ids, research_split->train);

  std::shared_ptr<const DataSplit> prev_split = research_split;
  Date last_data_cutoff = config.research_cutoff;   // new data accrues from here
  Date last_retrain_date = config.research_cutoff;  // fixed-interval anchor
  int event_index = 0;

  const int64_t window_days = static_cast<int64_t>(config.monitor.window_weeks) * 7;

  for (Date week_end = config.research_cutoff.plus_weeks(config.monitor.cadence_weeks);
       week_end < config.monitoring_end;
       week_end = week_end.plus_weeks(config.monitor.cadence_weeks)) {
    gate.advance(week_end);

    // Trailing window, clipped to the deployment period so research-phase
    // documents never enter monitoring scores.
    Date window_from = week_end.plus_days(-window_days);
    if (window_from < config.research_cutoff) window_from = config.research_cutoff;
    auto window_docs = to_pointers(gate.range(window_from, week_end));

    MonitorDecision decision =
        monitor_step(monitor_state, config.monitor, week_end, window_docs, champion.model,
                     corpus.label_space(), corpus.min_date(), &corpus, &cache);

    bool trigger = false;
    std::string trigger_reason;
    switch (config.schedule) {
      case ScheduleKind::threshold:
        trigger = decision == MonitorDecision::trigger_retraining;
        trigger_reason = "threshold";
        break;
      case ScheduleKind::fixed_interval:
        trigger = fixed_interval_due(last_retrain_date, week_end,
                                     config.monitor.fixed_interval_months);
        trigger_reason = "fixed_interval";
        break;
      case ScheduleKind::none:
        break;
    }
    if (!trigger) continue;

    auto new_docs = to_pointers(gate.range(last_data_cutoff, week_end));
    if (new_docs.empty()) {
      monitor_state.history.back().triggered = true;
      report.skipped.push_back({week_end, "no new documents since last training"});
      continue;
    }

    std::shared_ptr<const DataSplit> next_split;
    const uint64_t split_seed =
        derive_seed(config.seed, "split:" + std::to_string(event_index + 1));
    try {
      DataSplit allocated = [&] {
        const bool combined = config.inclusion == InclusionPolicy::new_plus_old;
        if (config.split_strategy == SplitStrategy::stratified) {
          return combined ? allocate_stratified_combined(new_docs, prev_split, corpus,
                                                         config.ratio,
                                                         config.carryover_fraction, split_seed)
                          : allocate_stratified_new_only(new_docs, corpus.label_space(),
                                                         config.ratio, split_seed, prev_split);
        }
        return combined ? allocate_chrono_combined(new_docs, prev_split, config.ratio)
                        : allocate_chrono_new_only(new_docs, config.ratio, prev_split);
      }();
      next_split = std::make_shared<DataSplit>(std::move(allocated));
    } catch (const ValidationError& e) {
      monitor_state.history.back().triggered = true;
      report.skipped.push_back({week_end, std::string("degenerate retraining split: ") + e.what()});
      continue;
    }

    // Training data per finetuning mode; validation always comes from the
    // new split so early stopping tracks the current period.
    std::vector<std::string> train_ids = next_split->train;
    if (config.finetune == FinetuneMode::cumulative ||
        config.finetune == FinetuneMode::checkpoint) {
      std::unordered_set<std::string> union_ids = historical_train_ids;
      absorb_ids(union_ids, next_split->train);
      train_ids.assign(union_ids.begin(), union_ids.end());
      std::sort(train_ids.begin(), train_ids.end());
    }

    auto challenger_train = gate.resolve(train_ids);
    auto challenger_val = gate.resolve(next_split->validation);
    auto challenger_test = gate.resolve(next_split->test);
    assert_no_leak(challenger_train, *next_split);
    if (log) {
      log->trainings.push_back({event_index, gate.indices_of(challenger_train),
                                gate.indices_of(challenger_val),
                                gate.indices_of(challenger_test), gate.now()});
    }

    TrainOptions retrain_options = config.train_options;
    retrain_options.seed = derive_seed(config.seed, "train:" + std::to_string(event_index + 1));
    const ModelState* init =
        config.finetune == FinetuneMode::checkpoint ? nullptr : &champion.model;
    TrainResult challenger = train(init, challenger_train, challenger_val,
                                   corpus.label_space(), config.feature_dimension,
                                   retrain_options, &corpus, &cache);

    RetrainingEvent event;
    event.trigger_date = week_end;
    event.trigger_reason = trigger_reason;
    event.new_docs = new_docs.size();
    event.train_size = challenger_train.size();
    event.validation_size = challenger_val.size();
    event.test_size = challenger_test.size();
    event.budget = challenger.budget;
    event.challenger_score = test_weighted_f1(challenger.model, challenger_test, corpus,
                                              cache, corpus.label_space());
    event.champion_score = test_weighted_f1(champion.model, challenger_test, corpus, cache,
                                            corpus.label_space());
    event.promoted = event.challenger_score >= event.champion_score;

    if (event.promoted) {
      champion = std::move(challenger);
      monitor_state.baseline = event.challenger_score;
    }
    monitor_state.breach_streak = 0;  // every retraining event resets the streak
    monitor_state.history.back().triggered = true;

    report.events.push_back(event);
    report.total_retraining_seconds += event.budget.wall_clock_seconds;
    absorb_ids(historical_train_ids, next_split->train);
    report.splits.push_back(next_split);
    prev_split = next_split;
    last_data_cutoff = week_end;
    last_retrain_date = week_end;
    ++event_index;
  }

  report.weekly = monitor_state.history;
  report.retraining_count = static_cast<uint32_t>(report.events.size());
  double score_sum = 0;
  size_t score_count = 0;
  for (const auto& record : report.weekly) {
    if (record.score) {
      score_sum += *record.score;
      ++score_count;
    }
  }
  report.avg_monitoring_performance = score_count ? score_sum / static_cast<double>(score_count) : 0.0;
  report.access = log;
  return report;
}

std::vector<ScenarioOutcome> run_matrix(std::span<const ScenarioConfig> scenarios,
                                        const Corpus& corpus, const FeatureCache& cache,
                                        uint32_t workers, bool track_access) {
  if (scenarios.empty()) {
    throw ValidationError("run_matrix needs at least one scenario");
  }
  if (workers == 0) workers = 1;

  std::vector<ScenarioOutcome> outcomes(scenarios.size());
  std::counting_semaphore<256> slots(std::min<uint32_t>(workers, 256));
  std::vector<std::future<void>> futures;
  futures.reserve(scenarios.size());

  for (size_t i = 0; i < scenarios.size(); ++i) {
    futures.push_back(std::async(std::launch::async, [&, i] {
      slots.acquire();
      try {
        outcomes[i].report = run_scenario(scenarios[i], corpus, cache, track_access);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
      slots.release();
    }));
  }
  for (auto& f : futures) f.get();
  return outcomes;
}

}  // namespace ctsim
