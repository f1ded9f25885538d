#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <unordered_set>

#include "ctsim/error.hpp"
#include "ctsim/rng.hpp"
#include "ctsim/splitter.hpp"

using namespace ctsim;

namespace {

struct Fixture {
  std::vector<Document> docs;
  LabelSpace space;

  std::vector<const Document*> pointers() const {
    std::vector<const Document*> out;
    for (const auto& d : docs) out.push_back(&d);
    return out;
  }
};

Fixture make_docs(size_t n, const std::vector<std::vector<std::string>>& label_sets,
                  const std::vector<std::string>& label_names, uint64_t date_seed = 1,
                  bool same_date = false) {
  Fixture f;
  Rng rng(date_seed);
  for (size_t i = 0; i < n; ++i) {
    Document d;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "d%04zu", i);
    d.id = buf;
    d.timestamp = same_date ? Date::parse("2000-06-15")
                            : Date::parse("2000-01-01").plus_days(
                                  static_cast<int64_t>(rng.below(3650)));
    d.text = "text";
    d.labels = label_sets[i % label_sets.size()];
    f.docs.push_back(std::move(d));
  }
  f.space = LabelSpace(std::vector<std::string>(label_names));
  return f;
}

void check_partition(const DataSplit& split, const std::vector<const Document*>& input) {
  std::set<std::string> expected;
  for (const auto* d : input) expected.insert(d->id);
  std::set<std::string> seen;
  for (const auto* part : {&split.train, &split.validation, &split.test}) {
    for (const auto& id : *part) {
      REQUIRE_MESSAGE(seen.insert(id).second, "duplicate id across subsets: " << id);
    }
  }
  REQUIRE(seen == expected);
}

size_t count_label(const std::vector<std::string>& ids,
                   const std::vector<Document>& docs, const std::string& label) {
  std::unordered_set<std::string_view> with_label;
  for (const auto& d : docs) {
    if (std::find(d.labels.begin(), d.labels.end(), label) != d.labels.end()) {
      with_label.insert(d.id);
    }
  }
  size_t n = 0;
  for (const auto& id : ids) n += with_label.count(id);
  return n;
}

}  // namespace

TEST_CASE("chronological split: 10 docs at 70:15:15 gives 7/2/1") {
  // round(10*0.7) = 7; round(10*0.15) = round(1.5) = 2 (half to even);
  // test takes the remainder 1.
  Fixture f = make_docs(10, {{"a"}}, {"a", "b"});
  DataSplit split = chronological_split(f.pointers(), SplitRatio::standard());
  CHECK(split.train.size() == 7);
  CHECK(split.validation.size() == 2);
  CHECK(split.test.size() == 1);
  check_partition(split, f.pointers());

  // Train holds the 7 oldest.
  std::vector<const Document*> sorted = f.pointers();
  std::sort(sorted.begin(), sorted.end(), [](const Document* a, const Document* b) {
    if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
    return a->id < b->id;
  });
  for (size_t i = 0; i < 7; ++i) {
    CHECK(std::find(split.train.begin(), split.train.end(), sorted[i]->id) !=
          split.train.end());
  }
}

TEST_CASE("chronological split: boundaries are monotone in time") {
  Fixture f = make_docs(50, {{"a"}, {"b"}}, {"a", "b"}, 77);
  DataSplit split = chronological_split(f.pointers(), SplitRatio::standard());
  auto timestamp_of = [&](const std::string& id) {
    for (const auto& d : f.docs) {
      if (d.id == id) return d.timestamp;
    }
    FAIL("unknown id");
    return Date{};
  };
  Date max_train = Date::parse("0001-01-01");
  for (const auto& id : split.train) max_train = std::max(max_train, timestamp_of(id));
  Date min_val = Date::parse("9999-01-01"), max_val = Date::parse("0001-01-01");
  for (const auto& id : split.validation) {
    min_val = std::min(min_val, timestamp_of(id));
    max_val = std::max(max_val, timestamp_of(id));
  }
  Date min_test = Date::parse("9999-01-01");
  for (const auto& id : split.test) min_test = std::min(min_test, timestamp_of(id));
  CHECK(max_train <= min_val);
  CHECK(max_val <= min_test);
}

TEST_CASE("chronological split: 3 docs is degenerate") {
  Fixture f = make_docs(3, {{"a"}}, {"a", "b"});
  CHECK_THROWS_AS(chronological_split(f.pointers(), SplitRatio::standard()),
                  ValidationError);
}

TEST_CASE("chronological split: equal dates break ties by id") {
  Fixture f = make_docs(20, {{"a"}}, {"a", "b"}, 1, /*same_date=*/true);
  DataSplit split = chronological_split(f.pointers(), SplitRatio::standard());
  // Ids d0000..d0019 sort lexicographically; train takes the first 14.
  CHECK(split.train.size() == 14);
  for (size_t i = 0; i < split.train.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "d%04zu", i);
    CHECK(split.train[i] == buf);
  }
  CHECK(split.test.back() == "d0019");
}

TEST_CASE("round_half_even matches the documented rule") {
  CHECK(round_half_even(1.5) == 2);
  CHECK(round_half_even(2.5) == 2);
  CHECK(round_half_even(0.5) == 0);
  CHECK(round_half_even(3.5) == 4);
  CHECK(round_half_even(1.4999) == 1);
  CHECK(round_half_even(7.0) == 7);
  CHECK(round_half_even(2.51) == 3);
}

TEST_CASE("stratified split: single label degenerates to the size partition") {
  Fixture f = make_docs(100, {{"a"}}, {"a", "b"});
  for (uint64_t seed : {0ull, 1ull, 42ull}) {
    DataSplit split = iterative_stratified_split(f.pointers(), f.space,
                                                 SplitRatio::standard(), seed);
    CHECK(split.train.size() == 70);
    CHECK(split.validation.size() == 15);
    CHECK(split.test.size() == 15);
    check_partition(split, f.pointers());
  }
}

TEST_CASE("stratified split: 80/20 prevalence preserved within one document") {
  // 200 docs, label 'a' on 80%, 'b' on 20%.
  std::vector<std::vector<std::string>> pattern;
  for (int i = 0; i < 8; ++i) pattern.push_back({"a"});
  for (int i = 0; i < 2; ++i) pattern.push_back({"b"});
  Fixture f = make_docs(200, pattern, {"a", "b"}, 5);
  DataSplit split = iterative_stratified_split(f.pointers(), f.space,
                                               SplitRatio::standard(), 17);
  check_partition(split, f.pointers());
  struct Part {
    const std::vector<std::string>* ids;
    double ratio;
  };
  for (const Part& part : {Part{&split.train, 0.70}, Part{&split.validation, 0.15},
                           Part{&split.test, 0.15}}) {
    const double expected_a = 160.0 * part.ratio;
    const double expected_b = 40.0 * part.ratio;
    CHECK(std::abs(double(count_label(*part.ids, f.docs, "a")) - expected_a) <= 1.0);
    CHECK(std::abs(double(count_label(*part.ids, f.docs, "b")) - expected_b) <= 1.0);
  }
}

TEST_CASE("stratified split is deterministic in (docs, ratio, seed)") {
  Fixture f = make_docs(90, {{"a"}, {"b"}, {"a", "c"}, {"c"}}, {"a", "b", "c"}, 3);
  DataSplit s1 = iterative_stratified_split(f.pointers(), f.space, SplitRatio::standard(), 9);
  DataSplit s2 = iterative_stratified_split(f.pointers(), f.space, SplitRatio::standard(), 9);
  CHECK(s1.train == s2.train);
  CHECK(s1.validation == s2.validation);
  CHECK(s1.test == s2.test);

  // Input order must not matter.
  auto shuffled = f.pointers();
  Rng rng(4);
  rng.shuffle(shuffled);
  DataSplit s3 = iterative_stratified_split(shuffled, f.space, SplitRatio::standard(), 9);
  CHECK(s1.train == s3.train);
  CHECK(s1.validation == s3.validation);
  CHECK(s1.test == s3.test);

  DataSplit other_seed =
      iterative_stratified_split(f.pointers(), f.space, SplitRatio::standard(), 10);
  bool identical = other_seed.train == s1.train && other_seed.validation == s1.validation;
  CHECK_FALSE(identical);
}

TEST_CASE("both splitters partition 400 random corpora") {
  Rng rng(321);
  for (int trial = 0; trial < 400; ++trial) {
    const size_t n = 20 + rng.below(120);
    const uint32_t n_labels = 2 + static_cast<uint32_t>(rng.below(5));
    std::vector<std::string> names;
    for (uint32_t l = 0; l < n_labels; ++l) names.push_back("L" + std::to_string(l));
    std::vector<std::vector<std::string>> sets;
    for (size_t i = 0; i < n; ++i) {
      std::vector<std::string> labels;
      const size_t k = 1 + rng.below(std::min<size_t>(3, n_labels));
      while (labels.size() < k) {
        std::string candidate = names[rng.below(n_labels)];
        if (std::find(labels.begin(), labels.end(), candidate) == labels.end()) {
          labels.push_back(candidate);
        }
      }
      sets.push_back(labels);
    }
    Fixture f = make_docs(n, sets, names, rng.next_u64());
    DataSplit chrono = chronological_split(f.pointers(), SplitRatio::standard());
    check_partition(chrono, f.pointers());
    DataSplit strat =
        iterative_stratified_split(f.pointers(), f.space, SplitRatio::standard(), trial);
    check_partition(strat, f.pointers());
  }
}

TEST_CASE("two-way partition: odd counts put the larger half first") {
  Fixture f = make_docs(151, {{"a"}, {"b"}, {"a", "b"}}, {"a", "b"}, 8);
  auto [first, second] = stratified_partition(f.pointers(), f.space, 0.5);
  CHECK(first.size() == 76);
  CHECK(second.size() == 75);

  Fixture even = make_docs(150, {{"a"}, {"b"}}, {"a", "b"}, 9);
  auto [left, right] = stratified_partition(even.pointers(), even.space, 0.5);
  CHECK(left.size() == 75);
  CHECK(right.size() == 75);
}

TEST_CASE("two-way partition balances labels") {
  std::vector<std::vector<std::string>> pattern = {{"a"}, {"a"}, {"a"}, {"b"}};
  Fixture f = make_docs(120, pattern, {"a", "b"}, 10);
  auto [first, second] = stratified_partition(f.pointers(), f.space, 0.5);
  auto count = [](const std::vector<const Document*>& docs, const char* label) {
    size_t n = 0;
    for (const auto* d : docs) {
      n += std::count(d->labels.begin(), d->labels.end(), label);
    }
    return n;
  };
  CHECK(std::abs(int(count(first, "a")) - int(count(second, "a"))) <= 1);
  CHECK(std::abs(int(count(first, "b")) - int(count(second, "b"))) <= 1);
}

TEST_CASE("split ratio validation") {
  SplitRatio zero_part{0.5, 0.5, 0.0};
  CHECK_THROWS_AS(zero_part.validate(), ValidationError);
  SplitRatio oversum{0.5, 0.3, 0.3};
  CHECK_THROWS_AS(oversum.validate(), ValidationError);
  SplitRatio fine{0.8, 0.1, 0.1};
  CHECK_NOTHROW(fine.validate());
}

TEST_CASE("manifest records ids, strategy and lineage") {
  Fixture f = make_docs(20, {{"a"}, {"b"}}, {"a", "b"}, 11);
  DataSplit split = iterative_stratified_split(f.pointers(), f.space,
                                               SplitRatio::standard(), 3);
  auto manifest = split.to_manifest();
  CHECK(manifest["strategy"] == "stratified");
  CHECK(manifest["seed"] == 3);
  CHECK(manifest["lineage_depth"] == 0);
  CHECK(manifest["train"].size() == split.train.size());
}
