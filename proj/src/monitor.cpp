#include "ctsim/monitor.hpp"

#include "ctsim/error.hpp"
#include "ctsim/metrics.hpp"

namespace ctsim {

std::string to_string(ScheduleKind s) {
  switch (s) {
    case ScheduleKind::threshold: return "threshold";
    case ScheduleKind::fixed_interval: return "fixed_interval";
    case ScheduleKind::none: return "none";
  }
  return "?";
}

ScheduleKind schedule_from_string(std::string_view s) {
  if (s == "threshold") return ScheduleKind::threshold;
  if (s == "fixed_interval") return ScheduleKind::fixed_interval;
  if (s == "none") return ScheduleKind::none;
  throw ValidationError("unknown schedule '" + std::string(s) + "'");
}

void MonitorConfig::validate() const {
  if (window_weeks == 0 || cadence_weeks == 0 || consecutive_breaches_required == 0 ||
      fixed_interval_months == 0) {
    throw ValidationError("monitor config values must be positive");
  }
  if (!(relative_drop > 0.0 && relative_drop < 1.0)) {
    throw ValidationError("relative_drop must lie in (0,1)");
  }
}

double compute_threshold(double baseline, double relative_drop) {
  if (!(baseline >= 0.0 && baseline <= 1.0)) {
    throw ValidationError("baseline score must lie in [0,1]");
  }
  if (!(relative_drop > 0.0 && relative_drop < 1.0)) {
    throw ValidationError("relative_drop must lie in (0,1)");
  }
  return baseline * (1.0 - relative_drop);
}

MonitorDecision monitor_step(MonitorState& state, const MonitorConfig& config,
                             Date week_end, std::span<const Document* const> window_docs,
                             const ModelState& model, const LabelSpace& space,
                             Date corpus_start, const Corpus* corpus,
                             const FeatureCache* cache) {
  config.validate();
  if (week_end < corpus_start) {
    throw ValidationError("monitoring week ends before the corpus starts: " +
                          week_end.to_string());
  }

  WeeklyRecord record;
  record.week_end = week_end;
  record.window_size = window_docs.size();
  record.threshold = compute_threshold(state.baseline, config.relative_drop);

  if (window_docs.empty()) {
    // No evidence either way: streak carries over untouched.
    record.streak = state.breach_streak;
    state.history.push_back(record);
    return MonitorDecision::none;
  }

  std::vector<LabelSet> preds(window_docs.size());
  std::vector<LabelSet> gold(window_docs.size());
  const bool cached = corpus != nullptr && cache != nullptr && !corpus->documents().empty();
  const Document* base = cached ? corpus->documents().data() : nullptr;
  for (size_t i = 0; i < window_docs.size(); ++i) {
    const Document* d = window_docs[i];
    if (cached && d >= base && d < base + corpus->size() &&
        cache->dimension() == model.dimension()) {
      preds[i] = predict(model, (*cache)[static_cast<size_t>(d - base)]);
    } else {
      preds[i] = predict(model, *d);
    }
    auto& g = gold[i];
    for (const auto& name : d->labels) {
      auto id = space.index_of(name);
      if (!id) {
        throw ValidationError("monitored document '" + d->id + "' carries label '" + name +
                              "' outside the label space");
      }
      g.push_back(*id);
    }
    std::sort(g.begin(), g.end());
  }

  const double score = evaluate(preds, gold, space).weighted_f1;
  const bool breached = score < record.threshold;

  record.score = score;
  record.breached = breached;
  state.breach_streak = breached ? state.breach_streak + 1 : 0;
  record.streak = state.breach_streak;

  MonitorDecision decision = MonitorDecision::none;
  if (state.breach_streak >= config.consecutive_breaches_required) {
    decision = MonitorDecision::trigger_retraining;
    state.breach_streak = 0;  // no double-fire while the retraining lands
  }
  state.history.push_back(record);
  return decision;
}

bool fixed_interval_due(Date last_retrain_date, Date current_date,
                        uint32_t interval_months) {
  if (current_date < last_retrain_date) {
    throw ValidationError("current date precedes the last retraining date");
  }
  if (interval_months == 0) {
    throw ValidationError("fixed interval must be positive");
  }
  return current_date >= last_retrain_date.plus_months_clamped(static_cast<int>(interval_months));
}

}  // namespace ctsim
