#include "ctsim/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "ctsim/error.hpp"
#include "ctsim/rng.hpp"

namespace ctsim {

std::string to_string(FinetuneMode m) {
  switch (m) {
    case FinetuneMode::incremental: return "incremental";
    case FinetuneMode::cumulative: return "cumulative";
    case FinetuneMode::checkpoint: return "checkpoint";
  }
  return "?";
}

FinetuneMode finetune_from_string(std::string_view s) {
  if (s == "incremental") return FinetuneMode::incremental;
  if (s == "cumulative") return FinetuneMode::cumulative;
  if (s == "checkpoint") return FinetuneMode::checkpoint;
  throw ValidationError("unknown finetune mode '" + std::string(s) + "'");
}

ModelState::ModelState(uint32_t label_count, uint32_t dimension,
                       uint64_t label_space_fingerprint)
    : label_count_(label_count),
      dimension_(dimension),
      fingerprint_(label_space_fingerprint),
      weights_(static_cast<size_t>(label_count) * dimension, 0.0),
      biases_(label_count, 0.0) {}

void ModelState::set_decision_threshold(double t) {
  if (!(t > 0.0 && t < 1.0)) {
    throw ValidationError("decision threshold must lie in (0,1)");
  }
  decision_threshold_ = t;
}

bool ModelState::same_weights(const ModelState& other) const {
  return label_count_ == other.label_count_ && dimension_ == other.dimension_ &&
         std::memcmp(weights_.data(), other.weights_.data(),
                     weights_.size() * sizeof(double)) == 0 &&
         std::memcmp(biases_.data(), other.biases_.data(),
                     biases_.size() * sizeof(double)) == 0;
}

namespace {

constexpr char kModelMagic[4] = {'C', 'T', 'S', 'M'};
constexpr uint32_t kModelVersion = 1;

template <class T>
void write_raw(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void read_raw(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

void write_string(std::ostream& os, const std::string& s) {
  write_raw(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  uint32_t n = 0;
  read_raw(is, n);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}

double sigmoid(double z) {
  if (z >= 0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

double dot(std::span<const double> w, const FeatureVector& x) {
  double z = 0;
  for (size_t i = 0; i < x.indices.size(); ++i) {
    z += w[x.indices[i]] * x.values[i];
  }
  return z;
}

/// Per-call training view: features plus per-document label bitmask words.
struct ExampleSet {
  std::vector<const FeatureVector*> features;
  std::vector<FeatureVector> owned;  // backing store when no cache is usable
  std::vector<uint64_t> label_words; // n_docs x words_per_doc
  std::vector<LabelSet> gold;
  size_t words_per_doc = 0;

  bool has_label(size_t doc, uint32_t label) const {
    return (label_words[doc * words_per_doc + label / 64] >> (label % 64)) & 1u;
  }
};

ExampleSet build_examples(std::span<const Document* const> docs, const LabelSpace& space,
                          uint32_t dimension, const Corpus* corpus,
                          const FeatureCache* cache) {
  ExampleSet set;
  const size_t n = docs.size();
  set.words_per_doc = (space.size() + 63) / 64;
  set.label_words.assign(n * set.words_per_doc, 0);
  set.features.resize(n);
  set.gold.resize(n);

  const bool cached = corpus != nullptr && cache != nullptr &&
                      cache->dimension() == dimension && !corpus->documents().empty();
  const Document* base = cached ? corpus->documents().data() : nullptr;
  const size_t corpus_size = cached ? corpus->size() : 0;

  if (!cached) set.owned.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const Document* d = docs[i];
    if (cached && d >= base && d < base + corpus_size) {
      set.features[i] = &(*cache)[static_cast<size_t>(d - base)];
    } else {
      set.owned.push_back(featurize(d->text, dimension));
      set.features[i] = &set.owned.back();
    }
    auto& gold = set.gold[i];
    gold.reserve(d->labels.size());
    for (const auto& name : d->labels) {
      auto id = space.index_of(name);
      if (!id) {
        throw ValidationError("document '" + d->id + "' carries label '" + name +
                              "' outside the label space");
      }
      gold.push_back(*id);
      set.label_words[i * set.words_per_doc + *id / 64] |= uint64_t{1} << (*id % 64);
    }
    std::sort(gold.begin(), gold.end());
  }
  return set;
}

double validation_weighted_f1(const ModelState& model, const ExampleSet& val,
                              const LabelSpace& space) {
  std::vector<LabelSet> preds(val.features.size());
  for (size_t i = 0; i < val.features.size(); ++i) {
    preds[i] = predict(model, *val.features[i]);
  }
  return evaluate(preds, val.gold, space).weighted_f1;
}

}  // namespace

TrainResult train(const ModelState* init, std::span<const Document* const> train_docs,
                  std::span<const Document* const> val_docs, const LabelSpace& space,
                  uint32_t dimension, const TrainOptions& options, const Corpus* corpus,
                  const FeatureCache* cache) {
  if (train_docs.empty() || val_docs.empty()) {
    throw ValidationError("training needs non-empty train and validation sets");
  }
  if (options.batch_size == 0 || options.max_epochs == 0 || options.evals_per_epoch == 0 ||
      options.early_stop_patience == 0) {
    throw ValidationError("training options must be positive");
  }
  const auto started = std::chrono::steady_clock::now();

  const uint32_t n_labels = space.size();
  ModelState model = [&] {
    if (init == nullptr) return ModelState(n_labels, dimension, space.fingerprint());
    if (init->label_count() != n_labels || init->dimension() != dimension ||
        init->label_space_fingerprint() != space.fingerprint()) {
      throw ValidationError("warm-start model does not match the label space or dimension");
    }
    return *init;
  }();

  ExampleSet train_set = build_examples(train_docs, space, dimension, corpus, cache);
  ExampleSet val_set = build_examples(val_docs, space, dimension, corpus, cache);

  const size_t n = train_docs.size();
  const size_t batch = options.batch_size;
  const size_t n_batches = (n + batch - 1) / batch;

  // Batch indices after which validation runs: evals_per_epoch points spread
  // over the epoch, the last one always at the epoch boundary. Short epochs
  // collapse to one evaluation per batch.
  std::vector<size_t> eval_after(options.evals_per_epoch);
  for (uint32_t k = 0; k < options.evals_per_epoch; ++k) {
    eval_after[k] = ((k + 1) * n_batches + options.evals_per_epoch - 1) /
                    options.evals_per_epoch;
  }
  eval_after.erase(std::unique(eval_after.begin(), eval_after.end()), eval_after.end());

  Rng rng(options.seed);
  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<double> grad_accum(dimension, 0.0);
  std::vector<uint32_t> touched;
  std::vector<double> slopes(batch);

  double best_score = -1.0;
  ModelState best = model;
  uint32_t stale_evals = 0;
  bool stop = false;

  TrainingBudget budget;
  for (uint32_t epoch = 1; epoch <= options.max_epochs && !stop; ++epoch) {
    budget.epochs_run = epoch;
    rng.shuffle(order);
    size_t next_eval = 0;
    for (size_t b = 0; b < n_batches && !stop; ++b) {
      const size_t begin = b * batch;
      const size_t end = std::min(begin + batch, n);
      const size_t m = end - begin;
      const double inv_m = 1.0 / static_cast<double>(m);
      double loss = 0;

      for (uint32_t label = 0; label < n_labels; ++label) {
        auto w = model.mutable_weights(label);
        double& bias = model.mutable_bias(label);
        double bias_slope = 0;
        touched.clear();
        for (size_t i = begin; i < end; ++i) {
          const FeatureVector& x = *train_set.features[order[i]];
          const double y = train_set.has_label(order[i], label) ? 1.0 : 0.0;
          const double p = sigmoid(dot(w, x) + bias);
          const double g = p - y;
          slopes[i - begin] = g;
          bias_slope += g;
          const double clamped = std::clamp(p, 1e-12, 1.0 - 1e-12);
          loss -= y > 0.5 ? std::log(clamped) : std::log(1.0 - clamped);
        }
        for (size_t i = begin; i < end; ++i) {
          const FeatureVector& x = *train_set.features[order[i]];
          const double g = slopes[i - begin];
          for (size_t k = 0; k < x.indices.size(); ++k) {
            uint32_t idx = x.indices[k];
            if (grad_accum[idx] == 0.0) touched.push_back(idx);
            grad_accum[idx] += g * x.values[k];
          }
        }
        const double step = options.learning_rate * inv_m;
        for (uint32_t idx : touched) {
          w[idx] -= step * grad_accum[idx];
          grad_accum[idx] = 0.0;
        }
        bias -= step * bias_slope;
      }

      if (!std::isfinite(loss)) {
        throw Error("training aborted: non-finite batch loss at epoch " +
                    std::to_string(epoch) + ", batch " + std::to_string(b));
      }
      budget.examples_seen += m;

      if (next_eval < eval_after.size() && b + 1 == eval_after[next_eval]) {
        ++next_eval;
        double score = validation_weighted_f1(model, val_set, space);
        if (score >= best_score + options.early_stop_min_delta) {
          best_score = score;
          best = model;
          stale_evals = 0;
        } else if (++stale_evals >= options.early_stop_patience) {
          stop = true;
        }
      }
    }
  }

  budget.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  TrainingEvent event;
  event.mode = init == nullptr ? "fresh" : "warm_start";
  event.train_size = train_docs.size();
  event.validation_size = val_docs.size();
  event.wall_seconds = budget.wall_clock_seconds;
  event.epochs = budget.epochs_run;
  best.append_event(std::move(event));

  return TrainResult{std::move(best), budget};
}

LabelSet predict(const ModelState& model, const FeatureVector& features) {
  if (features.dimension != model.dimension()) {
    throw ValidationError("feature dimension does not match the model");
  }
  LabelSet out;
  for (uint32_t label = 0; label < model.label_count(); ++label) {
    double p = sigmoid(dot(model.weights(label), features) + model.bias(label));
    if (p >= model.decision_threshold()) out.push_back(label);
  }
  return out;
}

LabelSet predict(const ModelState& model, const Document& doc) {
  return predict(model, featurize(doc.text, model.dimension()));
}

double batch_loss(const ModelState& model, std::span<const Document* const> batch,
                  const LabelSpace& space) {
  ExampleSet set = build_examples(batch, space, model.dimension(), nullptr, nullptr);
  double loss = 0;
  for (size_t i = 0; i < batch.size(); ++i) {
    for (uint32_t label = 0; label < model.label_count(); ++label) {
      const double y = set.has_label(i, label) ? 1.0 : 0.0;
      const double p = std::clamp(
          sigmoid(dot(model.weights(label), *set.features[i]) + model.bias(label)), 1e-12,
          1.0 - 1e-12);
      loss -= y > 0.5 ? std::log(p) : std::log(1.0 - p);
    }
  }
  return loss / static_cast<double>(batch.size());
}

std::vector<double> batch_gradient(const ModelState& model,
                                   std::span<const Document* const> batch,
                                   const LabelSpace& space) {
  ExampleSet set = build_examples(batch, space, model.dimension(), nullptr, nullptr);
  const size_t dim = model.dimension();
  std::vector<double> grad(static_cast<size_t>(model.label_count()) * dim +
                               model.label_count(),
                           0.0);
  const double inv_m = 1.0 / static_cast<double>(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    const FeatureVector& x = *set.features[i];
    for (uint32_t label = 0; label < model.label_count(); ++label) {
      const double y = set.has_label(i, label) ? 1.0 : 0.0;
      const double g =
          (sigmoid(dot(model.weights(label), x) + model.bias(label)) - y) * inv_m;
      double* row = grad.data() + static_cast<size_t>(label) * dim;
      for (size_t k = 0; k < x.indices.size(); ++k) {
        row[x.indices[k]] += g * x.values[k];
      }
      grad[static_cast<size_t>(model.label_count()) * dim + label] += g;
    }
  }
  return grad;
}

double gradient_check(const ModelState& model, std::span<const Document* const> batch,
                      const LabelSpace& space, uint64_t seed) {
  if (batch.empty() || batch.size() > 8) {
    throw ValidationError("gradient check expects a batch of 1..8 documents");
  }
  const double h = 1e-5;
  const size_t dim = model.dimension();
  std::vector<double> analytic = batch_gradient(model, batch, space);

  // Coordinates the batch touches give informative comparisons; pure zeros
  // only check that zero equals zero. Sample mostly from the support.
  std::vector<uint32_t> support;
  {
    ExampleSet set = build_examples(batch, space, model.dimension(), nullptr, nullptr);
    std::vector<bool> seen(dim, false);
    for (const FeatureVector* x : set.features) {
      for (uint32_t idx : x->indices) {
        if (!seen[idx]) {
          seen[idx] = true;
          support.push_back(idx);
        }
      }
    }
    std::sort(support.begin(), support.end());
  }

  Rng rng(seed);
  ModelState probe = model;
  double max_rel_err = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const uint32_t label = static_cast<uint32_t>(rng.below(model.label_count()));
    uint32_t idx;
    if (!support.empty() && rng.unit() < 0.8) {
      idx = support[rng.below(support.size())];
    } else {
      idx = static_cast<uint32_t>(rng.below(dim));
    }
    auto w = probe.mutable_weights(label);
    const double saved = w[idx];
    w[idx] = saved + h;
    const double plus = batch_loss(probe, batch, space);
    w[idx] = saved - h;
    const double minus = batch_loss(probe, batch, space);
    w[idx] = saved;

    const double numeric = (plus - minus) / (2 * h);
    const double a = analytic[static_cast<size_t>(label) * dim + idx];
    const double scale = std::max({std::abs(a), std::abs(numeric), 1e-8});
    max_rel_err = std::max(max_rel_err, std::abs(a - numeric) / scale);
  }
  return max_rel_err;
}

void ModelState::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file: " + path);
  out.write(kModelMagic, sizeof(kModelMagic));
  write_raw(out, kModelVersion);
  write_raw(out, fingerprint_);
  write_raw(out, label_count_);
  write_raw(out, dimension_);
  write_raw(out, decision_threshold_);
  out.write(reinterpret_cast<const char*>(weights_.data()),
            static_cast<std::streamsize>(weights_.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(biases_.data()),
            static_cast<std::streamsize>(biases_.size() * sizeof(double)));
  write_raw(out, static_cast<uint32_t>(provenance_.size()));
  for (const auto& e : provenance_) {
    write_string(out, e.mode);
    write_raw(out, e.train_size);
    write_raw(out, e.validation_size);
    write_raw(out, e.wall_seconds);
    write_raw(out, e.epochs);
  }
  if (!out) throw IoError("failed while writing model file: " + path);
}

ModelState ModelState::load(const std::string& path, const LabelSpace& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  char magic[4];
  in.read(magic, sizeof(magic));
  uint32_t version = 0;
  read_raw(in, version);
  if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0 ||
      version != kModelVersion) {
    throw ParseError("not a recognized model file: " + path);
  }
  uint64_t fingerprint = 0;
  uint32_t labels = 0, dim = 0;
  double threshold = 0.5;
  read_raw(in, fingerprint);
  read_raw(in, labels);
  read_raw(in, dim);
  read_raw(in, threshold);
  if (!in) throw ParseError("truncated model file: " + path);
  if (fingerprint != expected.fingerprint() || labels != expected.size()) {
    throw ValidationError("model file was trained against a different label space: " + path);
  }
  ModelState model(labels, dim, fingerprint);
  model.decision_threshold_ = threshold;
  in.read(reinterpret_cast<char*>(model.weights_.data()),
          static_cast<std::streamsize>(model.weights_.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(model.biases_.data()),
          static_cast<std::streamsize>(model.biases_.size() * sizeof(double)));
  uint32_t n_events = 0;
  read_raw(in, n_events);
  if (!in) throw ParseError("truncated model file: " + path);
  for (uint32_t i = 0; i < n_events; ++i) {
    TrainingEvent e;
    e.mode = read_string(in);
    read_raw(in, e.train_size);
    read_raw(in, e.validation_size);
    read_raw(in, e.wall_seconds);
    read_raw(in, e.epochs);
    model.provenance_.push_back(std::move(e));
  }
  if (!in) throw ParseError("truncated model file: " + path);
  return model;
}

}  // namespace ctsim
