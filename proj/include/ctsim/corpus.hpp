#ifndef CTSIM_CORPUS_HPP
#define CTSIM_CORPUS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ctsim/date.hpp"

namespace ctsim {

/// One timestamped, multilabel-annotated text record.
struct Document {
  std::string id;
  Date timestamp;
  std::string text;
  std::vector<std::string> labels;  // non-empty, subset of the corpus label space
};

/// Ordered list of distinct label names. The ordering is fixed for the
/// lifetime of a run; label ids are indices into it.
class LabelSpace {
 public:
  LabelSpace() = default;
  /// Throws ValidationError on duplicates or fewer than two labels.
  explicit LabelSpace(std::vector<std::string> names);

  uint32_t size() const { return static_cast<uint32_t>(names_.size()); }
  const std::string& name(uint32_t id) const { return names_[id]; }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<uint32_t> index_of(std::string_view name) const;

  /// FNV-1a over the names joined with '\n'; embedded in model files so a
  /// model can refuse to load against a different label space.
  uint64_t fingerprint() const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, uint32_t> index_;
};

/// Sparse L2-normalized hashed bag-of-words vector.
struct FeatureVector {
  std::vector<uint32_t> indices;  // strictly increasing, < dimension
  std::vector<double> values;     // parallel to indices, all finite
  uint32_t dimension = 0;
};

/// Deterministic hashed bag-of-words. Tokens are maximal ASCII alphanumeric
/// runs, lowercased; each token t maps to index fnv1a64(t) mod dimension;
/// counts are accumulated and the vector L2-normalized. dimension must be a
/// power of two >= 1024. Empty text yields the zero vector.
FeatureVector featurize(std::string_view text, uint32_t dimension);

struct IngestOptions {
  /// When non-empty, fixes the label space; labels outside it are rejected.
  /// When empty, the label space is the union of observed labels (sorted).
  std::vector<std::string> explicit_labels;
};

/// Immutable timestamp-ordered document collection. Safe for concurrent
/// reads once constructed.
class Corpus {
 public:
  Corpus() = default;

  /// JSON Lines, one object per line:
  ///   {"id": str, "timestamp": "YYYY-MM-DD", "text": str, "labels": [str...]}
  /// Rejects BOM-prefixed files, malformed records (with line numbers),
  /// empty label sets, unparseable dates, and duplicate ids.
  static Corpus load_jsonl(const std::string& path, const IngestOptions& options = {});

  void save_jsonl(const std::string& path) const;

  /// Builds a corpus from in-memory documents. Validates labels against the
  /// explicit space when given, otherwise infers the space.
  static Corpus from_documents(std::vector<Document> docs,
                               std::optional<LabelSpace> space = std::nullopt);

  const std::vector<Document>& documents() const { return docs_; }
  const LabelSpace& label_space() const { return labels_; }
  size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }

  Date min_date() const;
  Date max_date() const;

  /// Documents with from <= timestamp < to, in chronological order.
  /// Requires from < to.
  std::span<const Document> slice(Date from, Date to) const;

  /// Label ids of documents()[i], sorted ascending.
  const std::vector<uint32_t>& label_ids(size_t i) const { return label_ids_[i]; }

  /// Index into documents() for an id, or nullopt.
  std::optional<size_t> find(std::string_view id) const;

 private:
  void finalize();  // sort, validate, build indexes

  std::vector<Document> docs_;
  LabelSpace labels_;
  std::vector<std::vector<uint32_t>> label_ids_;
  std::unordered_map<std::string, size_t> by_id_;
};

/// Documents with from <= timestamp < to. Thin wrapper over Corpus::slice.
std::span<const Document> slice_by_date(const Corpus& corpus, Date from, Date to);

/// Eagerly computed feature vectors for every document of one corpus, shared
/// read-only by trainers and evaluators.
class FeatureCache {
 public:
  FeatureCache(const Corpus& corpus, uint32_t dimension);

  const FeatureVector& get(const Corpus& corpus, size_t doc_index) const;
  const FeatureVector& operator[](size_t doc_index) const { return features_[doc_index]; }
  uint32_t dimension() const { return dimension_; }

 private:
  const Corpus* corpus_;
  uint32_t dimension_;
  std::vector<FeatureVector> features_;
};

}  // namespace ctsim

#endif
