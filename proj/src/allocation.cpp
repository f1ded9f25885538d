#include "ctsim/allocation.hpp"

#include <algorithm>
#include <unordered_set>

#include "ctsim/error.hpp"

namespace ctsim {

std::string to_string(InclusionPolicy p) {
  switch (p) {
    case InclusionPolicy::new_only: return "new_only";
    case InclusionPolicy::new_plus_old: return "new_plus_old";
    case InclusionPolicy::new_plus_all_old: return "new_plus_all_old";
  }
  return "?";
}

InclusionPolicy inclusion_from_string(std::string_view s) {
  if (s == "new_only") return InclusionPolicy::new_only;
  if (s == "new_plus_old") return InclusionPolicy::new_plus_old;
  if (s == "new_plus_all_old") return InclusionPolicy::new_plus_all_old;
  throw ValidationError("unknown inclusion policy '" + std::string(s) + "'");
}

void AllocationPolicy::validate() const {
  if (!(carryover_fraction > 0.0 && carryover_fraction < 1.0)) {
    throw ValidationError("carryover fraction x must lie in (0,1)");
  }
}

namespace {

void check_disjoint_from_prev(std::span<const Document* const> new_docs,
                              const DataSplit& prev) {
  std::unordered_set<std::string_view> prev_ids;
  prev_ids.reserve(prev.total());
  for (const auto* list : {&prev.train, &prev.validation, &prev.test}) {
    for (const auto& id : *list) prev_ids.insert(id);
  }
  for (const Document* d : new_docs) {
    if (prev_ids.count(d->id)) {
      throw ValidationError("document id '" + d->id +
                            "' appears both in the new batch and the previous split");
    }
  }
}

std::vector<const Document*> resolve_ids(const Corpus& corpus,
                                         const std::vector<std::string>& ids) {
  std::vector<const Document*> docs;
  docs.reserve(ids.size());
  for (const auto& id : ids) {
    auto idx = corpus.find(id);
    if (!idx) {
      throw ValidationError("split references unknown document id '" + id + "'");
    }
    docs.push_back(&corpus.documents()[*idx]);
  }
  return docs;
}

void append_ids(std::vector<std::string>& out, const std::vector<const Document*>& docs) {
  for (const Document* d : docs) out.push_back(d->id);
}

}  // namespace

DataSplit allocate_stratified_new_only(std::span<const Document* const> new_docs,
                                       const LabelSpace& space, SplitRatio ratio,
                                       uint64_t seed,
                                       std::shared_ptr<const DataSplit> prev) {
  if (prev) check_disjoint_from_prev(new_docs, *prev);
  DataSplit split = iterative_stratified_split(new_docs, space, ratio, seed);
  split.parent = std::move(prev);
  return split;
}

DataSplit allocate_stratified_combined(std::span<const Document* const> new_docs,
                                       std::shared_ptr<const DataSplit> prev,
                                       const Corpus& corpus, SplitRatio ratio, double x,
                                       uint64_t seed) {
  if (!prev || prev->total() == 0) {
    throw ValidationError("stratified combined allocation needs a non-empty previous split");
  }
  if (prev->test.empty()) {
    throw ValidationError("stratified combined allocation needs a non-empty previous test set");
  }
  if (!(x > 0.0 && x < 1.0)) {
    throw ValidationError("carryover fraction x must lie in (0,1)");
  }
  check_disjoint_from_prev(new_docs, *prev);

  DataSplit split = iterative_stratified_split(new_docs, corpus.label_space(), ratio, seed);

  auto prev_test_docs = resolve_ids(corpus, prev->test);
  auto [to_validation, to_test] =
      stratified_partition(prev_test_docs, corpus.label_space(), x);

  split.train.insert(split.train.end(), prev->validation.begin(), prev->validation.end());
  append_ids(split.validation, to_validation);
  append_ids(split.test, to_test);
  split.parent = std::move(prev);
  return split;
}

DataSplit allocate_chrono_new_only(std::span<const Document* const> new_docs,
                                   SplitRatio ratio, std::shared_ptr<const DataSplit> prev) {
  if (prev) check_disjoint_from_prev(new_docs, *prev);
  DataSplit split = chronological_split(new_docs, ratio);
  split.parent = std::move(prev);
  return split;
}

DataSplit allocate_chrono_combined(std::span<const Document* const> new_docs,
                                   std::shared_ptr<const DataSplit> prev,
                                   SplitRatio ratio) {
  if (!prev || prev->total() == 0) {
    throw ValidationError("chronological combined allocation needs a non-empty previous split");
  }
  check_disjoint_from_prev(new_docs, *prev);

  DataSplit split = chronological_split(new_docs, ratio);
  split.train.insert(split.train.end(), prev->validation.begin(), prev->validation.end());
  split.train.insert(split.train.end(), prev->test.begin(), prev->test.end());
  split.parent = std::move(prev);
  return split;
}

}  // namespace ctsim
