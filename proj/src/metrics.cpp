#include "ctsim/metrics.hpp"

#include <algorithm>

#include "ctsim/error.hpp"

namespace ctsim {

EvalResult evaluate(std::span<const LabelSet> predictions, std::span<const LabelSet> gold,
                    const LabelSpace& space) {
  if (predictions.size() != gold.size()) {
    throw ValidationError("predictions and gold differ in length: " +
                          std::to_string(predictions.size()) + " vs " +
                          std::to_string(gold.size()));
  }
  if (predictions.empty()) {
    throw ValidationError("cannot evaluate zero instances");
  }

  const uint32_t n_labels = space.size();
  std::vector<uint64_t> tp(n_labels, 0), fp(n_labels, 0), fn(n_labels, 0);

  auto check_sorted_in_space = [&](const LabelSet& set) {
    uint32_t prev = 0;
    bool first = true;
    for (uint32_t l : set) {
      if (l >= n_labels) {
        throw ValidationError("label id " + std::to_string(l) + " outside the label space");
      }
      if (!first && l <= prev) {
        throw ValidationError("label sets must be sorted and duplicate-free");
      }
      prev = l;
      first = false;
    }
  };

  for (size_t i = 0; i < predictions.size(); ++i) {
    const LabelSet& p = predictions[i];
    const LabelSet& g = gold[i];
    check_sorted_in_space(p);
    check_sorted_in_space(g);
    size_t pi = 0, gi = 0;
    while (pi < p.size() || gi < g.size()) {
      if (gi == g.size() || (pi < p.size() && p[pi] < g[gi])) {
        ++fp[p[pi++]];
      } else if (pi == p.size() || g[gi] < p[pi]) {
        ++fn[g[gi++]];
      } else {
        ++tp[p[pi]];
        ++pi;
        ++gi;
      }
    }
  }

  EvalResult result;
  result.per_label.resize(n_labels);
  uint64_t total_support = 0;
  uint64_t tp_sum = 0, fp_sum = 0, fn_sum = 0;
  double weighted_sum = 0, macro_sum = 0;
  for (uint32_t l = 0; l < n_labels; ++l) {
    LabelScore& s = result.per_label[l];
    s.support = tp[l] + fn[l];
    s.precision = (tp[l] + fp[l]) ? static_cast<double>(tp[l]) / static_cast<double>(tp[l] + fp[l]) : 0.0;
    s.recall = (tp[l] + fn[l]) ? static_cast<double>(tp[l]) / static_cast<double>(tp[l] + fn[l]) : 0.0;
    s.f1 = (s.precision + s.recall > 0) ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                                        : 0.0;
    total_support += s.support;
    weighted_sum += static_cast<double>(s.support) * s.f1;
    macro_sum += s.f1;
    tp_sum += tp[l];
    fp_sum += fp[l];
    fn_sum += fn[l];
  }
  result.weighted_f1 = total_support ? weighted_sum / static_cast<double>(total_support) : 0.0;
  result.macro_f1 = n_labels ? macro_sum / n_labels : 0.0;
  double micro_p = (tp_sum + fp_sum) ? static_cast<double>(tp_sum) / static_cast<double>(tp_sum + fp_sum) : 0.0;
  double micro_r = (tp_sum + fn_sum) ? static_cast<double>(tp_sum) / static_cast<double>(tp_sum + fn_sum) : 0.0;
  result.micro_f1 = (micro_p + micro_r > 0) ? 2.0 * micro_p * micro_r / (micro_p + micro_r) : 0.0;
  return result;
}

}  // namespace ctsim
