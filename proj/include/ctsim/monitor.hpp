#ifndef CTSIM_MONITOR_HPP
#define CTSIM_MONITOR_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctsim/corpus.hpp"
#include "ctsim/date.hpp"
#include "ctsim/trainer.hpp"

namespace ctsim {

enum class ScheduleKind { threshold, fixed_interval, none };

std::string to_string(ScheduleKind s);
ScheduleKind schedule_from_string(std::string_view s);

struct MonitorConfig {
  uint32_t window_weeks = 4;
  uint32_t cadence_weeks = 1;
  double relative_drop = 0.05;
  uint32_t consecutive_breaches_required = 4;
  uint32_t fixed_interval_months = 6;
  ScheduleKind schedule = ScheduleKind::threshold;

  void validate() const;
};

/// One monitoring evaluation. score/breached are absent for empty windows.
struct WeeklyRecord {
  Date week_end;
  uint64_t window_size = 0;
  std::optional<double> score;
  double threshold = 0;  // baseline * (1 - relative_drop) in effect this week
  std::optional<bool> breached;
  uint32_t streak = 0;
  bool triggered = false;  // did this week's evaluation fire a retraining
};

/// Rolling monitoring state for one deployed model. The breach streak counts
/// the trailing run of breaches and resets to zero on every retraining event.
struct MonitorState {
  double baseline = 0.0;  // deployed model's test score at last (re)training
  uint32_t breach_streak = 0;
  std::vector<WeeklyRecord> history;
};

enum class MonitorDecision { none, trigger_retraining };

/// baseline * (1 - relative_drop). Requires baseline in [0,1] and
/// relative_drop in (0,1).
double compute_threshold(double baseline, double relative_drop);

/// Scores the model on one trailing window and updates the state. An empty
/// window records an absent score and leaves the streak alone. A non-empty
/// window breaches when score < threshold (strictly); the streak increments
/// on breach and resets otherwise. Reaching consecutive_breaches_required
/// returns trigger_retraining and resets the streak.
MonitorDecision monitor_step(MonitorState& state, const MonitorConfig& config,
                             Date week_end, std::span<const Document* const> window_docs,
                             const ModelState& model, const LabelSpace& space,
                             Date corpus_start, const Corpus* corpus = nullptr,
                             const FeatureCache* cache = nullptr);

/// True once current_date reaches last_retrain_date advanced by
/// interval_months calendar months (day-of-month clamped to month end).
bool fixed_interval_due(Date last_retrain_date, Date current_date, uint32_t interval_months);

}  // namespace ctsim

#endif
