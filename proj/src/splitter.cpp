#include "ctsim/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "ctsim/error.hpp"
#include "ctsim/rng.hpp"

namespace ctsim {

void SplitRatio::validate() const {
  for (double f : {train, validation, test}) {
    if (!(f > 0.0 && f < 1.0)) {
      throw ValidationError("split ratio fractions must lie in (0,1)");
    }
  }
  if (std::abs(train + validation + test - 1.0) > 1e-9) {
    throw ValidationError("split ratio fractions must sum to 1");
  }
}

std::string to_string(SplitStrategy s) {
  return s == SplitStrategy::stratified ? "stratified" : "chronological";
}

SplitStrategy split_strategy_from_string(std::string_view s) {
  if (s == "stratified") return SplitStrategy::stratified;
  if (s == "chronological") return SplitStrategy::chronological;
  throw ValidationError("unknown split strategy '" + std::string(s) + "'");
}

size_t DataSplit::lineage_depth() const {
  size_t depth = 0;
  for (const DataSplit* p = parent.get(); p != nullptr; p = p->parent.get()) ++depth;
  return depth;
}

nlohmann::ordered_json DataSplit::to_manifest() const {
  nlohmann::ordered_json j;
  j["strategy"] = to_string(strategy);
  j["ratio"] = {{"train", ratio.train}, {"validation", ratio.validation}, {"test", ratio.test}};
  j["seed"] = seed;
  j["lineage_depth"] = lineage_depth();
  j["train"] = train;
  j["validation"] = validation;
  j["test"] = test;
  return j;
}

long long round_half_even(double x) {
  double fl = std::floor(x);
  double frac = x - fl;
  long long base = static_cast<long long>(fl);
  if (frac > 0.5) return base + 1;
  if (frac < 0.5) return base;
  return (base % 2 == 0) ? base : base + 1;
}

namespace {

std::vector<const Document*> sorted_canonical(std::span<const Document* const> docs) {
  std::vector<const Document*> sorted(docs.begin(), docs.end());
  std::sort(sorted.begin(), sorted.end(), [](const Document* a, const Document* b) {
    if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
    return a->id < b->id;
  });
  return sorted;
}

std::vector<std::string> ids_of(const std::vector<const Document*>& docs) {
  std::vector<std::string> ids;
  ids.reserve(docs.size());
  for (const Document* d : docs) ids.push_back(d->id);
  return ids;
}

/// Core greedy assignment. fractions.size() subsets; when tie_rng is null,
/// final ties go to the lowest subset index.
std::vector<std::vector<const Document*>> stratify(std::vector<const Document*> docs,
                                                   const LabelSpace& space,
                                                   std::span<const double> fractions,
                                                   Rng* tie_rng) {
  const size_t n_subsets = fractions.size();
  const size_t n = docs.size();
  const uint32_t n_labels = space.size();

  // Per-document label ids.
  std::vector<std::vector<uint32_t>> doc_labels(n);
  for (size_t i = 0; i < n; ++i) {
    doc_labels[i].reserve(docs[i]->labels.size());
    for (const auto& name : docs[i]->labels) {
      auto id = space.index_of(name);
      if (!id) {
        throw ValidationError("document '" + docs[i]->id + "' carries label '" + name +
                              "' outside the label space");
      }
      doc_labels[i].push_back(*id);
    }
  }

  // Documents carrying each label, in canonical order.
  std::vector<std::vector<uint32_t>> label_docs(n_labels);
  std::vector<size_t> unassigned_per_label(n_labels, 0);
  for (size_t i = 0; i < n; ++i) {
    for (uint32_t l : doc_labels[i]) {
      label_docs[l].push_back(static_cast<uint32_t>(i));
      ++unassigned_per_label[l];
    }
  }

  // Remaining demands: c[j] overall, c_label[j][l] per label.
  std::vector<double> remaining_total(n_subsets);
  std::vector<std::vector<double>> remaining_label(n_subsets,
                                                   std::vector<double>(n_labels, 0.0));
  for (size_t j = 0; j < n_subsets; ++j) {
    remaining_total[j] = fractions[j] * static_cast<double>(n);
    for (uint32_t l = 0; l < n_labels; ++l) {
      remaining_label[j][l] =
          fractions[j] * static_cast<double>(label_docs[l].size());
    }
  }

  std::vector<int> assignment(n, -1);

  auto choose_subset = [&](uint32_t label) {
    size_t best = 0;
    size_t tied = 1;
    for (size_t j = 1; j < n_subsets; ++j) {
      double dl = remaining_label[j][label] - remaining_label[best][label];
      if (dl > 0) {
        best = j;
        tied = 1;
      } else if (dl == 0) {
        double dt = remaining_total[j] - remaining_total[best];
        if (dt > 0) {
          best = j;
          tied = 1;
        } else if (dt == 0) {
          // Full tie. Reservoir-style pick keeps the choice uniform across
          // tied subsets; without an rng the lowest index wins.
          ++tied;
          if (tie_rng && tie_rng->below(tied) == 0) best = j;
        }
      }
    }
    return best;
  };

  auto assign = [&](uint32_t doc, size_t subset) {
    assignment[doc] = static_cast<int>(subset);
    remaining_total[subset] -= 1.0;
    for (uint32_t l : doc_labels[doc]) {
      remaining_label[subset][l] -= 1.0;
      --unassigned_per_label[l];
    }
  };

  size_t assigned = 0;
  while (assigned < n) {
    // Rarest label still carrying unassigned documents; ties by label order.
    uint32_t target = n_labels;
    size_t target_count = std::numeric_limits<size_t>::max();
    for (uint32_t l = 0; l < n_labels; ++l) {
      if (unassigned_per_label[l] > 0 && unassigned_per_label[l] < target_count) {
        target = l;
        target_count = unassigned_per_label[l];
      }
    }
    if (target == n_labels) break;  // only label-less documents remain
    for (uint32_t doc : label_docs[target]) {
      if (assignment[doc] >= 0) continue;
      assign(doc, choose_subset(target));
      ++assigned;
    }
  }

  // Documents with no labels (not produced by Corpus, but the contract
  // defines them): largest remaining total demand wins.
  for (uint32_t i = 0; i < n; ++i) {
    if (assignment[i] >= 0) continue;
    size_t best = 0;
    for (size_t j = 1; j < n_subsets; ++j) {
      if (remaining_total[j] > remaining_total[best]) best = j;
    }
    assign(i, best);
  }

  std::vector<std::vector<const Document*>> out(n_subsets);
  for (size_t i = 0; i < n; ++i) {
    out[static_cast<size_t>(assignment[i])].push_back(docs[i]);
  }
  return out;
}

}  // namespace

std::vector<const Document*> doc_pointers(std::span<const Document> docs) {
  std::vector<const Document*> out;
  out.reserve(docs.size());
  for (const Document& d : docs) out.push_back(&d);
  return out;
}

DataSplit chronological_split(std::span<const Document* const> docs, SplitRatio ratio) {
  ratio.validate();
  if (docs.size() < 3) {
    throw ValidationError("degenerate split: need at least 3 documents, got " +
                          std::to_string(docs.size()));
  }
  auto sorted = sorted_canonical(docs);
  const auto n = static_cast<double>(sorted.size());
  auto n_train = static_cast<size_t>(round_half_even(n * ratio.train));
  auto n_val = static_cast<size_t>(round_half_even(n * ratio.validation));
  if (n_train + n_val > sorted.size()) {
    throw ValidationError("degenerate split: rounded sizes exceed document count");
  }
  size_t n_test = sorted.size() - n_train - n_val;
  if (n_train == 0 || n_val == 0 || n_test == 0) {
    throw ValidationError("degenerate split: a subset would be empty at this size");
  }

  DataSplit split;
  split.strategy = SplitStrategy::chronological;
  split.ratio = ratio;
  split.train = ids_of({sorted.begin(), sorted.begin() + n_train});
  split.validation = ids_of({sorted.begin() + n_train, sorted.begin() + n_train + n_val});
  split.test = ids_of({sorted.begin() + n_train + n_val, sorted.end()});
  return split;
}

DataSplit iterative_stratified_split(std::span<const Document* const> docs,
                                     const LabelSpace& space, SplitRatio ratio,
                                     uint64_t seed) {
  ratio.validate();
  if (docs.size() < 3) {
    throw ValidationError("degenerate split: need at least 3 documents, got " +
                          std::to_string(docs.size()));
  }
  Rng rng(seed);
  const double fractions[3] = {ratio.train, ratio.validation, ratio.test};
  auto parts = stratify(sorted_canonical(docs), space, fractions, &rng);
  if (parts[0].empty() || parts[1].empty() || parts[2].empty()) {
    throw ValidationError("degenerate split: a subset came out empty at this size");
  }

  DataSplit split;
  split.strategy = SplitStrategy::stratified;
  split.ratio = ratio;
  split.seed = seed;
  split.train = ids_of(parts[0]);
  split.validation = ids_of(parts[1]);
  split.test = ids_of(parts[2]);
  return split;
}

std::pair<std::vector<const Document*>, std::vector<const Document*>> stratified_partition(
    std::span<const Document* const> docs, const LabelSpace& space, double first_fraction) {
  if (!(first_fraction > 0.0 && first_fraction < 1.0)) {
    throw ValidationError("partition fraction must lie in (0,1)");
  }
  // Final ties resolve toward the first part, which is what puts the larger
  // half there on odd counts.
  const double fractions[2] = {first_fraction, 1.0 - first_fraction};
  auto parts = stratify(sorted_canonical(docs), space, fractions, nullptr);
  return {std::move(parts[0]), std::move(parts[1])};
}

}  // namespace ctsim
