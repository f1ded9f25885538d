#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "ctsim/error.hpp"
#include "ctsim/metrics.hpp"
#include "ctsim/rng.hpp"
#include "ctsim/trainer.hpp"

using namespace ctsim;

namespace {

/// Two labels with disjoint vocabularies: linearly separable by
/// construction, since no feature occurs under both labels.
Corpus separable_corpus(size_t per_label, uint64_t seed = 1) {
  Rng rng(seed);
  std::vector<Document> docs;
  for (size_t i = 0; i < per_label * 2; ++i) {
    Document d;
    d.id = "doc" + std::to_string(i);
    d.timestamp = Date::parse("2015-01-01").plus_days(static_cast<int64_t>(i));
    bool first = i % 2 == 0;
    std::string token_base = first ? "alpha" : "beta";
    std::string text;
    for (int t = 0; t < 6; ++t) {
      if (t) text += ' ';
      text += token_base + std::to_string(rng.below(8));
    }
    d.text = text;
    d.labels = {first ? "A" : "B"};
    docs.push_back(std::move(d));
  }
  return Corpus::from_documents(std::move(docs), LabelSpace({"A", "B"}));
}

std::vector<const Document*> all_docs(const Corpus& corpus) {
  return doc_pointers({corpus.documents().data(), corpus.size()});
}

double score_on(const ModelState& model, const Corpus& corpus,
                const std::vector<const Document*>& docs) {
  std::vector<LabelSet> preds, gold;
  for (const auto* d : docs) {
    preds.push_back(predict(model, *d));
    gold.push_back(corpus.label_ids(static_cast<size_t>(d - corpus.documents().data())));
  }
  return evaluate(preds, gold, corpus.label_space()).weighted_f1;
}

TrainOptions quick_options(uint64_t seed) {
  TrainOptions options;
  options.seed = seed;
  options.batch_size = 8;
  return options;
}

}  // namespace

TEST_CASE("fresh training separates a separable toy set") {
  Corpus corpus = separable_corpus(10);
  auto docs = all_docs(corpus);
  std::vector<const Document*> train(docs.begin(), docs.begin() + 14);
  std::vector<const Document*> val(docs.begin() + 14, docs.end());
  TrainResult r = train(nullptr, train, val, corpus.label_space(), 1024,
                        quick_options(5), &corpus, nullptr);
  CHECK(score_on(r.model, corpus, train) >= 0.99);
  CHECK(r.budget.epochs_run >= 1);
  CHECK(r.budget.wall_clock_seconds > 0);
}

TEST_CASE("training is deterministic: same seed, same data, same bits") {
  Corpus corpus = separable_corpus(12);
  auto docs = all_docs(corpus);
  std::vector<const Document*> train(docs.begin(), docs.begin() + 16);
  std::vector<const Document*> val(docs.begin() + 16, docs.end());
  TrainResult a = train(nullptr, train, val, corpus.label_space(), 1024,
                        quick_options(7), &corpus, nullptr);
  TrainResult b = train(nullptr, train, val, corpus.label_space(), 1024,
                        quick_options(7), &corpus, nullptr);
  CHECK(a.model.same_weights(b.model));
  CHECK(a.budget.epochs_run == b.budget.epochs_run);
  CHECK(a.budget.examples_seen == b.budget.examples_seen);

  TrainResult c = train(nullptr, train, val, corpus.label_space(), 1024,
                        quick_options(8), &corpus, nullptr);
  CHECK_FALSE(a.model.same_weights(c.model));
}

TEST_CASE("warm start from zero weights equals a fresh run bit for bit") {
  Corpus corpus = separable_corpus(10);
  auto docs = all_docs(corpus);
  std::vector<const Document*> train(docs.begin(), docs.begin() + 14);
  std::vector<const Document*> val(docs.begin() + 14, docs.end());
  ModelState zeros(corpus.label_space().size(), 1024, corpus.label_space().fingerprint());
  TrainResult fresh = train(nullptr, train, val, corpus.label_space(), 1024,
                            quick_options(3), &corpus, nullptr);
  TrainResult warm = train(&zeros, train, val, corpus.label_space(), 1024,
                           quick_options(3), &corpus, nullptr);
  CHECK(fresh.model.same_weights(warm.model));
}

TEST_CASE("early stopping fires on a plateau") {
  // Train and validation are the same tiny separable set; the score hits 1.0
  // at the first evaluation and never improves again, so patience runs out
  // after 5 more evaluations, early in epoch 2.
  Corpus corpus = separable_corpus(10);
  auto docs = all_docs(corpus);
  TrainOptions options;
  options.seed = 2;
  options.batch_size = 4;  // 5 batches/epoch -> one evaluation per batch
  TrainResult r = train(nullptr, docs, docs, corpus.label_space(), 1024, options,
                        &corpus, nullptr);
  CHECK(r.budget.epochs_run < 35);
  CHECK(r.budget.epochs_run == 2);
  // One partial epoch: full first epoch plus one batch of the second.
  CHECK(r.budget.examples_seen == 20 + 4);
}

TEST_CASE("examples_seen accounts for whole epochs plus the partial one") {
  Corpus corpus = separable_corpus(16);
  auto docs = all_docs(corpus);
  std::vector<const Document*> train(docs.begin(), docs.begin() + 24);
  std::vector<const Document*> val(docs.begin() + 24, docs.end());
  TrainResult r = train(nullptr, train, val, corpus.label_space(), 1024,
                        quick_options(11), &corpus, nullptr);
  const uint64_t n = train.size();
  const uint64_t full_epochs = r.budget.epochs_run - 1;
  CHECK(r.budget.examples_seen > full_epochs * n);
  CHECK(r.budget.examples_seen <= r.budget.epochs_run * n);
}

TEST_CASE("prediction decision rule at the threshold") {
  LabelSpace space({"A", "B", "C"});
  ModelState zeros(3, 1024, space.fingerprint());
  FeatureVector x = featurize("anything at all", 1024);

  // sigmoid(0) = 0.5 >= 0.5: every label fires.
  CHECK(predict(zeros, x).size() == 3);

  ModelState above(3, 1024, space.fingerprint());
  above.set_decision_threshold(0.5 + 1e-9);
  CHECK(predict(above, x).empty());
}

TEST_CASE("a single trained label scores its own example above threshold") {
  Corpus corpus = separable_corpus(10);
  auto docs = all_docs(corpus);
  std::vector<const Document*> train(docs.begin(), docs.begin() + 14);
  std::vector<const Document*> val(docs.begin() + 14, docs.end());
  TrainResult r = train(nullptr, train, val, corpus.label_space(), 1024,
                        quick_options(5), &corpus, nullptr);
  const Document* positive = train[0];
  LabelSet prediction = predict(r.model, *positive);
  auto expected = corpus.label_space().index_of(positive->labels[0]);
  REQUIRE(expected.has_value());
  CHECK(std::find(prediction.begin(), prediction.end(), *expected) != prediction.end());
}

TEST_CASE("gradient check: analytic vs central differences under 1e-4") {
  Corpus corpus = separable_corpus(4, 21);
  auto docs = all_docs(corpus);
  std::vector<const Document*> batch(docs.begin(), docs.begin() + 6);

  // Random non-zero weights make the comparison non-trivial.
  ModelState model(corpus.label_space().size(), 1024, corpus.label_space().fingerprint());
  Rng rng(77);
  for (uint32_t l = 0; l < model.label_count(); ++l) {
    for (double& w : model.mutable_weights(l)) {
      w = (rng.unit() - 0.5) * 0.4;
    }
    model.mutable_bias(l) = (rng.unit() - 0.5) * 0.2;
  }
  CHECK(gradient_check(model, batch, corpus.label_space(), 1234) < 1e-4);
}

TEST_CASE("gradient check rejects oversized batches") {
  Corpus corpus = separable_corpus(8);
  auto docs = all_docs(corpus);
  ModelState model(2, 1024, corpus.label_space().fingerprint());
  CHECK_THROWS_AS(gradient_check(model, docs, corpus.label_space()), ValidationError);
}

TEST_CASE("zero input vector: weight gradient zero, bias gradient sigmoid(b)-y") {
  std::vector<Document> raw;
  Document d;
  d.id = "empty";
  d.timestamp = Date::parse("2015-01-01");
  d.text = "";  // featurizes to the zero vector
  d.labels = {"A"};
  raw.push_back(d);
  Corpus corpus = Corpus::from_documents(std::move(raw), LabelSpace({"A", "B"}));
  std::vector<const Document*> batch = all_docs(corpus);

  ModelState model(2, 1024, corpus.label_space().fingerprint());
  model.mutable_bias(0) = 0.3;
  model.mutable_bias(1) = -0.2;
  auto grad = batch_gradient(model, batch, corpus.label_space());

  const size_t dim = model.dimension();
  for (size_t i = 0; i < 2 * dim; ++i) {
    REQUIRE(grad[i] == 0.0);
  }
  auto sigmoid = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  CHECK(grad[2 * dim + 0] == doctest::Approx(sigmoid(0.3) - 1.0).epsilon(1e-12));
  CHECK(grad[2 * dim + 1] == doctest::Approx(sigmoid(-0.2) - 0.0).epsilon(1e-12));
}

TEST_CASE("duplicated example doubles its contribution to the batch gradient") {
  Corpus corpus = separable_corpus(4, 33);
  auto docs = all_docs(corpus);
  const Document* d1 = docs[0];
  const Document* d2 = docs[1];
  ModelState model(2, 1024, corpus.label_space().fingerprint());
  Rng rng(5);
  for (uint32_t l = 0; l < 2; ++l) {
    for (double& w : model.mutable_weights(l)) w = (rng.unit() - 0.5) * 0.3;
  }

  std::vector<const Document*> single1 = {d1};
  std::vector<const Document*> single2 = {d2};
  std::vector<const Document*> dup = {d1, d2, d2};
  auto g1 = batch_gradient(model, single1, corpus.label_space());
  auto g2 = batch_gradient(model, single2, corpus.label_space());
  auto gd = batch_gradient(model, dup, corpus.label_space());
  for (size_t i = 0; i < gd.size(); ++i) {
    CHECK(3.0 * gd[i] == doctest::Approx(g1[i] + 2.0 * g2[i]).epsilon(1e-12));
  }
}

TEST_CASE("training aborts on a poisoned warm start") {
  Corpus corpus = separable_corpus(8);
  auto docs = all_docs(corpus);
  std::vector<const Document*> train(docs.begin(), docs.begin() + 10);
  std::vector<const Document*> val(docs.begin() + 10, docs.end());
  ModelState poisoned(2, 1024, corpus.label_space().fingerprint());
  poisoned.mutable_bias(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(train(&poisoned, train, val, corpus.label_space(), 1024, quick_options(1),
                        &corpus, nullptr),
                  Error);
}

TEST_CASE("training validates inputs") {
  Corpus corpus = separable_corpus(8);
  auto docs = all_docs(corpus);
  std::vector<const Document*> empty;
  CHECK_THROWS_AS(train(nullptr, empty, docs, corpus.label_space(), 1024, quick_options(1),
                        &corpus, nullptr),
                  ValidationError);
  // Warm start shape mismatch.
  ModelState wrong_dim(2, 2048, corpus.label_space().fingerprint());
  CHECK_THROWS_AS(train(&wrong_dim, docs, docs, corpus.label_space(), 1024,
                        quick_options(1), &corpus, nullptr),
                  ValidationError);
}

TEST_CASE("model files round-trip and refuse foreign label spaces") {
  Corpus corpus = separable_corpus(10);
  auto docs = all_docs(corpus);
  std::vector<const Document*> train(docs.begin(), docs.begin() + 14);
  std::vector<const Document*> val(docs.begin() + 14, docs.end());
  TrainResult r = train(nullptr, train, val, corpus.label_space(), 1024,
                        quick_options(9), &corpus, nullptr);

  auto path = std::filesystem::temp_directory_path() / "ctsim_model_test.bin";
  r.model.save(path.string());
  ModelState loaded = ModelState::load(path.string(), corpus.label_space());
  CHECK(loaded.same_weights(r.model));
  CHECK(loaded.decision_threshold() == r.model.decision_threshold());
  REQUIRE(loaded.provenance().size() == r.model.provenance().size());
  CHECK(loaded.provenance().back().train_size == train.size());

  LabelSpace other({"X", "Y", "Z"});
  CHECK_THROWS_AS(ModelState::load(path.string(), other), ValidationError);
  std::filesystem::remove(path);
}
