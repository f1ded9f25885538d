#ifndef CTSIM_ALLOCATION_HPP
#define CTSIM_ALLOCATION_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ctsim/corpus.hpp"
#include "ctsim/splitter.hpp"

namespace ctsim {

/// How newly acquired data is folded into the next retraining split.
enum class InclusionPolicy { new_only, new_plus_old, new_plus_all_old };

std::string to_string(InclusionPolicy p);
InclusionPolicy inclusion_from_string(std::string_view s);

struct AllocationPolicy {
  SplitStrategy split_strategy = SplitStrategy::stratified;
  InclusionPolicy inclusion = InclusionPolicy::new_only;
  /// Fraction of the previous test set moved into the new validation set;
  /// only the stratified new_plus_old workflow reads it.
  double carryover_fraction = 0.5;

  void validate() const;
};

/// Stratified split of the new documents alone; the previous split is only
/// recorded as lineage.
DataSplit allocate_stratified_new_only(std::span<const Document* const> new_docs,
                                       const LabelSpace& space, SplitRatio ratio,
                                       uint64_t seed,
                                       std::shared_ptr<const DataSplit> prev);

/// Stratified split of the new documents, then: previous validation joins the
/// new train set; the previous test set is stratified into an x part (joins
/// new validation) and a 1-x part (joins new test). Previous train documents
/// are never reused.
DataSplit allocate_stratified_combined(std::span<const Document* const> new_docs,
                                       std::shared_ptr<const DataSplit> prev,
                                       const Corpus& corpus, SplitRatio ratio, double x,
                                       uint64_t seed);

/// Chronological split of the new documents alone.
DataSplit allocate_chrono_new_only(std::span<const Document* const> new_docs,
                                   SplitRatio ratio, std::shared_ptr<const DataSplit> prev);

/// Chronological split of the new documents; previous validation and test
/// both join the new train set.
DataSplit allocate_chrono_combined(std::span<const Document* const> new_docs,
                                   std::shared_ptr<const DataSplit> prev,
                                   SplitRatio ratio);

}  // namespace ctsim

#endif
