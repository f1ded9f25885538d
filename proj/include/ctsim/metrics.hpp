#ifndef CTSIM_METRICS_HPP
#define CTSIM_METRICS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "ctsim/corpus.hpp"

namespace ctsim {

/// Sorted label ids.
using LabelSet = std::vector<uint32_t>;

struct LabelScore {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  uint64_t support = 0;  // gold occurrences
};

struct EvalResult {
  double weighted_f1 = 0;  // support-weighted mean of per-label F1
  double micro_f1 = 0;
  double macro_f1 = 0;     // unweighted mean over all labels in the space
  std::vector<LabelScore> per_label;
};

/// Multilabel precision/recall/F1. Zero denominators score 0 by convention,
/// so the all-empty-predictions case is well defined. Throws ValidationError
/// on length mismatch, empty input, or out-of-space label ids.
EvalResult evaluate(std::span<const LabelSet> predictions, std::span<const LabelSet> gold,
                    const LabelSpace& space);

}  // namespace ctsim

#endif
