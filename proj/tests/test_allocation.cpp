#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "ctsim/allocation.hpp"
#include "ctsim/error.hpp"
#include "ctsim/rng.hpp"

using namespace ctsim;

namespace {

/// Builds a corpus whose documents arrive in numbered batches so tests can
/// carve out "previous" and "new" generations by date. With identical_labels
/// every document carries the full label set, which makes stratified subset
/// sizes exact and lets tests assert arithmetic without slack.
Corpus batch_corpus(const std::vector<size_t>& batch_sizes, uint32_t n_labels,
                    uint64_t seed, bool identical_labels = false) {
  Rng rng(seed);
  std::vector<std::string> names;
  for (uint32_t l = 0; l < n_labels; ++l) names.push_back("L" + std::to_string(l));
  std::vector<Document> docs;
  size_t counter = 0;
  Date batch_start = Date::parse("2010-01-01");
  for (size_t batch = 0; batch < batch_sizes.size(); ++batch) {
    for (size_t i = 0; i < batch_sizes[batch]; ++i) {
      Document d;
      char buf[24];
      std::snprintf(buf, sizeof(buf), "b%02zu_d%05zu", batch, counter++);
      d.id = buf;
      d.timestamp = batch_start.plus_days(static_cast<int64_t>(rng.below(300)));
      d.text = "text";
      if (identical_labels) {
        d.labels.assign(names.begin(), names.end());
      } else {
        const size_t k = 1 + rng.below(2);
        std::set<std::string> labels;
        while (labels.size() < k) labels.insert(names[rng.below(n_labels)]);
        d.labels.assign(labels.begin(), labels.end());
      }
      docs.push_back(std::move(d));
    }
    batch_start = batch_start.plus_days(400);
  }
  return Corpus::from_documents(std::move(docs), LabelSpace(std::move(names)));
}

std::vector<const Document*> batch_docs(const Corpus& corpus, const std::string& prefix) {
  std::vector<const Document*> out;
  for (const auto& d : corpus.documents()) {
    if (d.id.rfind(prefix, 0) == 0) out.push_back(&d);
  }
  return out;
}

void check_partition_over(const DataSplit& split, std::set<std::string> expected) {
  std::set<std::string> seen;
  for (const auto* part : {&split.train, &split.validation, &split.test}) {
    for (const auto& id : *part) {
      REQUIRE_MESSAGE(seen.insert(id).second, "duplicate id " << id);
    }
  }
  REQUIRE(seen == expected);
}

std::set<std::string> union_ids(std::initializer_list<const std::vector<std::string>*> lists) {
  std::set<std::string> out;
  for (const auto* l : lists) out.insert(l->begin(), l->end());
  return out;
}

std::set<std::string> ids_of(const std::vector<const Document*>& docs) {
  std::set<std::string> out;
  for (const auto* d : docs) out.insert(d->id);
  return out;
}

}  // namespace

TEST_CASE("stratified new-only partitions exactly the new ids") {
  Corpus corpus = batch_corpus({300, 1000}, 4, 1);
  auto prev_docs = batch_docs(corpus, "b00_");
  auto prev = std::make_shared<DataSplit>(iterative_stratified_split(
      prev_docs, corpus.label_space(), SplitRatio::standard(), 7));
  auto new_docs = batch_docs(corpus, "b01_");

  DataSplit split = allocate_stratified_new_only(new_docs, corpus.label_space(),
                                                 SplitRatio::standard(), 8, prev);
  check_partition_over(split, ids_of(new_docs));
  CHECK(split.total() == 1000);
  CHECK(split.parent == prev);
  CHECK(split.lineage_depth() == 1);

  // No previous id leaks into the new split.
  auto prev_ids = union_ids({&prev->train, &prev->validation, &prev->test});
  for (const auto* part : {&split.train, &split.validation, &split.test}) {
    for (const auto& id : *part) CHECK(prev_ids.count(id) == 0);
  }
}

TEST_CASE("stratified combined: sizes follow the workflow arithmetic") {
  // prev split sized so validation=150, test=150; 1000 new docs at 70:15:15
  // with x = 0.5 gives train 700+150, validation 150+75, test 150+75.
  Corpus corpus = batch_corpus({1000, 1000}, 4, 2, /*identical_labels=*/true);
  auto prev_docs = batch_docs(corpus, "b00_");
  auto prev = std::make_shared<DataSplit>(iterative_stratified_split(
      prev_docs, corpus.label_space(), SplitRatio::standard(), 7));
  REQUIRE(prev->validation.size() == 150);
  REQUIRE(prev->test.size() == 150);
  auto new_docs = batch_docs(corpus, "b01_");

  DataSplit split = allocate_stratified_combined(new_docs, prev, corpus,
                                                 SplitRatio::standard(), 0.5, 9);
  CHECK(split.train.size() == 850);
  CHECK(split.validation.size() == 225);
  CHECK(split.test.size() == 225);
  std::set<std::string> universe = union_ids({&prev->validation, &prev->test});
  for (const auto& id : ids_of(new_docs)) universe.insert(id);
  check_partition_over(split, universe);
}

TEST_CASE("stratified combined: every previous validation id moves to train") {
  Corpus corpus = batch_corpus({400, 600}, 3, 3);
  auto prev = std::make_shared<DataSplit>(iterative_stratified_split(
      batch_docs(corpus, "b00_"), corpus.label_space(), SplitRatio::standard(), 4));
  DataSplit split = allocate_stratified_combined(batch_docs(corpus, "b01_"), prev, corpus,
                                                 SplitRatio::standard(), 0.5, 5);
  std::unordered_set<std::string> train_ids(split.train.begin(), split.train.end());
  for (const auto& id : prev->validation) CHECK(train_ids.count(id) == 1);
  // Previous train ids are dropped.
  for (const auto& id : prev->train) {
    CHECK(train_ids.count(id) == 0);
  }
}

TEST_CASE("stratified combined: odd previous test puts the larger half in validation") {
  Corpus corpus = batch_corpus({1007, 500}, 3, 6, /*identical_labels=*/true);
  auto prev = std::make_shared<DataSplit>(iterative_stratified_split(
      batch_docs(corpus, "b00_"), corpus.label_space(), SplitRatio::standard(), 4));
  const size_t prev_test = prev->test.size();
  REQUIRE(prev_test == 151);  // 1007 docs: demands 704.9/151.05/151.05
  DataSplit split = allocate_stratified_combined(batch_docs(corpus, "b01_"), prev, corpus,
                                                 SplitRatio::standard(), 0.5, 5);
  const size_t val_carry = split.validation.size() - 75;  // 500*0.15 = 75 new
  const size_t test_carry = split.test.size() - 75;
  CHECK(val_carry == 76);
  CHECK(test_carry == 75);
}

TEST_CASE("stratified combined requires a non-empty previous test set") {
  Corpus corpus = batch_corpus({40, 100}, 3, 7);
  auto prev = std::make_shared<DataSplit>(iterative_stratified_split(
      batch_docs(corpus, "b00_"), corpus.label_space(), SplitRatio::standard(), 4));
  auto hollow = std::make_shared<DataSplit>(*prev);
  hollow->test.clear();
  CHECK_THROWS_AS(allocate_stratified_combined(batch_docs(corpus, "b01_"), hollow, corpus,
                                               SplitRatio::standard(), 0.5, 5),
                  ValidationError);
}

TEST_CASE("chronological new-only splits only new ids, oldest first") {
  Corpus corpus = batch_corpus({50, 10}, 3, 8);
  auto prev = std::make_shared<DataSplit>(
      chronological_split(batch_docs(corpus, "b00_"), SplitRatio::standard()));
  auto new_docs = batch_docs(corpus, "b01_");
  DataSplit split = allocate_chrono_new_only(new_docs, SplitRatio::standard(), prev);
  CHECK(split.train.size() == 7);
  CHECK(split.validation.size() == 2);
  CHECK(split.test.size() == 1);
  check_partition_over(split, ids_of(new_docs));

  // Oldest 7 ids are in train.
  std::vector<const Document*> sorted = new_docs;
  std::sort(sorted.begin(), sorted.end(), [](const Document* a, const Document* b) {
    if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
    return a->id < b->id;
  });
  for (size_t i = 0; i < 7; ++i) {
    CHECK(std::find(split.train.begin(), split.train.end(), sorted[i]->id) !=
          split.train.end());
  }
}

TEST_CASE("chronological combined: previous validation and test join train") {
  Corpus corpus = batch_corpus({1000, 1000}, 4, 9);
  auto prev = std::make_shared<DataSplit>(
      chronological_split(batch_docs(corpus, "b00_"), SplitRatio::standard()));
  REQUIRE(prev->validation.size() == 150);
  REQUIRE(prev->test.size() == 150);
  auto new_docs = batch_docs(corpus, "b01_");
  DataSplit split = allocate_chrono_combined(new_docs, prev, SplitRatio::standard());

  CHECK(split.train.size() == 700 + 300);  // 1000*0.7 new + 150 + 150 carried
  CHECK(split.validation.size() == 150);
  CHECK(split.test.size() == 150);

  std::unordered_set<std::string> train_ids(split.train.begin(), split.train.end());
  for (const auto& id : prev->validation) CHECK(train_ids.count(id) == 1);
  for (const auto& id : prev->test) CHECK(train_ids.count(id) == 1);
  for (const auto& id : prev->train) CHECK(train_ids.count(id) == 0);

  // Validation and test hold only new-period documents.
  auto new_ids = ids_of(new_docs);
  for (const auto& id : split.validation) CHECK(new_ids.count(id) == 1);
  for (const auto& id : split.test) CHECK(new_ids.count(id) == 1);
}

TEST_CASE("allocators reject overlapping new and previous ids") {
  Corpus corpus = batch_corpus({100, 100}, 3, 10);
  auto prev = std::make_shared<DataSplit>(
      chronological_split(batch_docs(corpus, "b00_"), SplitRatio::standard()));
  auto overlapping = batch_docs(corpus, "b00_");  // same docs as prev
  CHECK_THROWS_AS(allocate_chrono_combined(overlapping, prev, SplitRatio::standard()),
                  ValidationError);
}

TEST_CASE("lineage chain: k retrainings reach the research split in k steps") {
  Corpus corpus = batch_corpus({200, 200, 200, 200, 200, 200}, 3, 11);
  auto current = std::make_shared<const DataSplit>(iterative_stratified_split(
      batch_docs(corpus, "b00_"), corpus.label_space(), SplitRatio::standard(), 1));
  for (int k = 1; k <= 5; ++k) {
    char prefix[8];
    std::snprintf(prefix, sizeof(prefix), "b%02d_", k);
    current = std::make_shared<const DataSplit>(
        allocate_stratified_combined(batch_docs(corpus, prefix), current, corpus,
                                     SplitRatio::standard(), 0.5, 100 + k));
    CHECK(current->lineage_depth() == static_cast<size_t>(k));
  }
  const DataSplit* walk = current.get();
  int steps = 0;
  while (walk->parent) {
    walk = walk->parent.get();
    ++steps;
  }
  CHECK(steps == 5);
  CHECK(walk->seed == 1);  // back at the research split
}

TEST_CASE("stratified combined dilutes research test ids like (1-x)^k") {
  // With x = 0.5, each retraining keeps roughly half of the surviving
  // research-phase test ids in the current test set; per-label rounding can
  // shave a handful of documents either way.
  Corpus corpus = batch_corpus({4000, 800, 800, 800}, 4, 12);
  auto research = std::make_shared<const DataSplit>(iterative_stratified_split(
      batch_docs(corpus, "b00_"), corpus.label_space(), SplitRatio::standard(), 1));
  std::set<std::string> research_test(research->test.begin(), research->test.end());
  const double n0 = static_cast<double>(research_test.size());

  auto current = research;
  for (int k = 1; k <= 3; ++k) {
    char prefix[8];
    std::snprintf(prefix, sizeof(prefix), "b%02d_", k);
    current = std::make_shared<const DataSplit>(
        allocate_stratified_combined(batch_docs(corpus, prefix), current, corpus,
                                     SplitRatio::standard(), 0.5, 200 + k));
    size_t surviving = 0;
    for (const auto& id : current->test) surviving += research_test.count(id);
    const double expected = n0 * std::pow(0.5, k);
    CHECK(std::abs(static_cast<double>(surviving) - expected) <=
          static_cast<double>(corpus.label_space().size()) + 2.0);
  }
}
