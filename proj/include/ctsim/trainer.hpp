#ifndef CTSIM_TRAINER_HPP
#define CTSIM_TRAINER_HPP

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ctsim/corpus.hpp"
#include "ctsim/metrics.hpp"

namespace ctsim {

/// How a challenger is initialized and which data it sees. The mode itself
/// only labels the run; the orchestrator assembles the matching init/data.
enum class FinetuneMode { incremental, cumulative, checkpoint };

std::string to_string(FinetuneMode m);
FinetuneMode finetune_from_string(std::string_view s);

struct TrainOptions {
  double learning_rate = 0.1;
  uint32_t batch_size = 32;
  uint32_t max_epochs = 35;
  uint32_t evals_per_epoch = 5;
  /// Stop after this many consecutive validation evaluations that fail to
  /// improve the best score by at least min_delta.
  uint32_t early_stop_patience = 5;
  double early_stop_min_delta = 0.001;
  uint64_t seed = 0;
};

struct TrainingEvent {
  std::string mode;  // "fresh" or "warm_start"
  uint64_t train_size = 0;
  uint64_t validation_size = 0;
  double wall_seconds = 0;
  uint32_t epochs = 0;
};

/// Measured (not estimated) cost of one training call.
struct TrainingBudget {
  double wall_clock_seconds = 0;
  uint32_t epochs_run = 0;
  uint64_t examples_seen = 0;
};

/// One-vs-rest logistic weights over the hashed feature space: a dense
/// (labels x dimension) matrix plus per-label bias. Immutable once returned
/// from train(); safe to share across threads for prediction.
class ModelState {
 public:
  ModelState(uint32_t label_count, uint32_t dimension, uint64_t label_space_fingerprint);

  uint32_t label_count() const { return label_count_; }
  uint32_t dimension() const { return dimension_; }
  uint64_t label_space_fingerprint() const { return fingerprint_; }

  std::span<const double> weights(uint32_t label) const {
    return {weights_.data() + static_cast<size_t>(label) * dimension_, dimension_};
  }
  std::span<double> mutable_weights(uint32_t label) {
    return {weights_.data() + static_cast<size_t>(label) * dimension_, dimension_};
  }
  double bias(uint32_t label) const { return biases_[label]; }
  double& mutable_bias(uint32_t label) { return biases_[label]; }

  double decision_threshold() const { return decision_threshold_; }
  void set_decision_threshold(double t);

  const std::vector<TrainingEvent>& provenance() const { return provenance_; }
  void append_event(TrainingEvent e) { provenance_.push_back(std::move(e)); }

  bool same_weights(const ModelState& other) const;

  /// Versioned binary weight file with the label-space fingerprint embedded.
  void save(const std::string& path) const;
  /// Refuses to load against a mismatched label space.
  static ModelState load(const std::string& path, const LabelSpace& expected);

 private:
  uint32_t label_count_;
  uint32_t dimension_;
  uint64_t fingerprint_;
  double decision_threshold_ = 0.5;
  std::vector<double> weights_;  // row-major (label_count x dimension)
  std::vector<double> biases_;
  std::vector<TrainingEvent> provenance_;

  friend struct TrainerAccess;
};

struct TrainResult {
  ModelState model;
  TrainingBudget budget;
};

/// Trains one-vs-rest logistic classifiers with mini-batch SGD on binary
/// cross-entropy. Validation weighted-F1 is evaluated evals_per_epoch times
/// per epoch; training stops early per TrainOptions and the weights that
/// scored best on validation are returned. Deterministic in
/// (init, docs, options.seed).
///
/// init == nullptr trains from zero weights; otherwise training warm-starts
/// from a copy of *init (whose shape must match).
/// cache may be null, in which case features are computed on the fly.
TrainResult train(const ModelState* init, std::span<const Document* const> train_docs,
                  std::span<const Document* const> val_docs, const LabelSpace& space,
                  uint32_t dimension, const TrainOptions& options,
                  const Corpus* corpus = nullptr, const FeatureCache* cache = nullptr);

/// Labels whose sigmoid score clears the decision threshold, sorted.
LabelSet predict(const ModelState& model, const FeatureVector& features);
LabelSet predict(const ModelState& model, const Document& doc);

/// Mean binary cross-entropy of a small batch under the model.
double batch_loss(const ModelState& model, std::span<const Document* const> batch,
                  const LabelSpace& space);

/// Analytic gradient of batch_loss with respect to (weights, biases).
/// Returned as one flat vector: label-major weights, then biases.
std::vector<double> batch_gradient(const ModelState& model,
                                   std::span<const Document* const> batch,
                                   const LabelSpace& space);

/// Compares the analytic batch gradient against central finite differences
/// (h = 1e-5) at 100 randomly sampled weight coordinates, biased toward
/// coordinates the batch actually touches. Returns the max relative error.
/// Requires batch size <= 8.
double gradient_check(const ModelState& model, std::span<const Document* const> batch,
                      const LabelSpace& space, uint64_t seed = 1234);

}  // namespace ctsim

#endif
