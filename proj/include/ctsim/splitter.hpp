#ifndef CTSIM_SPLITTER_HPP
#define CTSIM_SPLITTER_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctsim/corpus.hpp"

namespace ctsim {

struct SplitRatio {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;

  /// Each fraction in (0,1), summing to 1 within 1e-9.
  void validate() const;
  static SplitRatio standard() { return {}; }
};

enum class SplitStrategy { stratified, chronological };

std::string to_string(SplitStrategy s);
SplitStrategy split_strategy_from_string(std::string_view s);

/// A train/validation/test partition of document ids, with lineage to the
/// split it was derived from.
struct DataSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  SplitStrategy strategy = SplitStrategy::stratified;
  SplitRatio ratio;
  uint64_t seed = 0;
  std::shared_ptr<const DataSplit> parent;  // nullptr for the research split

  size_t total() const { return train.size() + validation.size() + test.size(); }

  /// Steps from this split back to the lineage root.
  size_t lineage_depth() const;

  /// JSON manifest: id lists plus strategy/ratio/seed/lineage depth.
  nlohmann::ordered_json to_manifest() const;
};

/// round(x) with ties to even, independent of the floating point environment.
long long round_half_even(double x);

/// Oldest docs to train, newest to test. Sizes follow the rounding rule
/// train = round(n*r_train), validation = round(n*r_val), test = remainder.
/// Ties on equal dates are broken by id order. Throws ValidationError when
/// fewer than 3 documents are given or any part would come out empty.
DataSplit chronological_split(std::span<const Document* const> docs, SplitRatio ratio);

/// Greedy multilabel stratification: repeatedly take the label with the
/// fewest unassigned documents (ties by label order) and deal each of its
/// documents to the subset with the largest remaining per-label demand,
/// breaking ties by largest remaining total demand, then by seeded
/// pseudo-randomness. Fully deterministic in (docs, ratio, seed).
DataSplit iterative_stratified_split(std::span<const Document* const> docs,
                                     const LabelSpace& space, SplitRatio ratio, uint64_t seed);

/// Two-way label-balanced partition with target fractions (first_fraction,
/// 1-first_fraction). Same greedy procedure, but final ties prefer the first
/// part, so an odd count leaves the first part larger. Parts may be empty.
std::pair<std::vector<const Document*>, std::vector<const Document*>> stratified_partition(
    std::span<const Document* const> docs, const LabelSpace& space, double first_fraction);

/// Convenience: pointers into a document span, in the span's order.
std::vector<const Document*> doc_pointers(std::span<const Document> docs);

}  // namespace ctsim

#endif
