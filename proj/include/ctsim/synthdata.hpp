#ifndef CTSIM_SYNTHDATA_HPP
#define CTSIM_SYNTHDATA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctsim/corpus.hpp"
#include "ctsim/date.hpp"

namespace ctsim {

enum class DriftKind { vocabulary_shift, label_prior_shift, label_emergence };

std::string to_string(DriftKind k);
DriftKind drift_kind_from_string(std::string_view s);

struct DriftEvent {
  Date date;
  DriftKind kind = DriftKind::vocabulary_shift;
  double magnitude = 0.5;  // in (0,1]
};

/// Declarative description of a synthetic timestamped multilabel corpus.
/// Each label owns a disjoint token pool, so what a model can learn about a
/// label -- and what a drift event destroys -- is fully attributable.
struct DriftSpec {
  uint32_t n_labels = 35;
  uint32_t docs_per_week = 100;
  uint32_t tokens_per_label = 40;
  uint32_t noise_pool_size = 200;
  double noise_token_share = 0.10;
  uint32_t doc_length_min = 10;
  uint32_t doc_length_max = 50;
  /// P(document carries k labels), k = 1..weights.size(); renormalized.
  std::vector<double> label_count_weights = {0.40, 0.35, 0.25};
  /// The last `dormant_labels` labels start with zero prior and only appear
  /// after a label_emergence event activates them.
  uint32_t dormant_labels = 0;
  Date span_start;
  Date span_end;  // exclusive
  std::vector<DriftEvent> events;
  uint64_t seed = 0;

  void validate() const;
  static DriftSpec from_json(const nlohmann::json& j);
  static DriftSpec from_json_file(const std::string& path);
  nlohmann::ordered_json to_json() const;
};

/// Generates the corpus week by week. Vocabulary shifts replace a magnitude
/// fraction of every active label's tokens with fresh ones; prior shifts mix
/// the label prior toward a freshly drawn one; emergence activates the next
/// dormant label with the magnitude as its prior share. Events take effect
/// at the first week boundary on or after their date. Deterministic in seed.
Corpus generate(const DriftSpec& spec);

/// Number of documents the generator emits per week over the span
/// (currently uniform: docs_per_week for every whole or partial week).
std::vector<uint64_t> weekly_counts(const DriftSpec& spec);

}  // namespace ctsim

#endif
