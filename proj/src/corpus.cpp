#include "ctsim/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ctsim/error.hpp"
#include "ctsim/rng.hpp"

namespace ctsim {

LabelSpace::LabelSpace(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) {
    throw ValidationError("label space needs at least two labels, got " +
                          std::to_string(names_.size()));
  }
  index_.reserve(names_.size());
  for (uint32_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      throw ValidationError("duplicate label '" + names_[i] + "' in label space");
    }
  }
}

std::optional<uint32_t> LabelSpace::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

uint64_t LabelSpace::fingerprint() const {
  std::string joined;
  for (const auto& n : names_) {
    joined += n;
    joined += '\n';
  }
  return fnv1a64(joined);
}

FeatureVector featurize(std::string_view text, uint32_t dimension) {
  if (dimension < 1024 || (dimension & (dimension - 1)) != 0) {
    throw ValidationError("feature dimension must be a power of two >= 1024, got " +
                          std::to_string(dimension));
  }
  std::unordered_map<uint32_t, double> counts;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    counts[static_cast<uint32_t>(fnv1a64(token) & (dimension - 1))] += 1.0;
    token.clear();
  };
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      token.push_back(static_cast<char>(std::tolower(u)));
    } else {
      flush();
    }
  }
  flush();

  FeatureVector out;
  out.dimension = dimension;
  out.indices.reserve(counts.size());
  for (const auto& [idx, _] : counts) out.indices.push_back(idx);
  std::sort(out.indices.begin(), out.indices.end());
  out.values.reserve(out.indices.size());
  double norm_sq = 0;
  for (uint32_t idx : out.indices) {
    double v = counts[idx];
    out.values.push_back(v);
    norm_sq += v * v;
  }
  if (norm_sq > 0) {
    double inv = 1.0 / std::sqrt(norm_sq);
    for (double& v : out.values) v *= inv;
  }
  return out;
}

namespace {

Document parse_record(const std::string& line, size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) {
    throw ParseError("line " + std::to_string(line_no) + ": record is not a JSON object");
  }
  auto require = [&](const char* key) -> const nlohmann::json& {
    auto it = j.find(key);
    if (it == j.end()) {
      throw ParseError("line " + std::to_string(line_no) + ": missing field '" + key + "'");
    }
    return *it;
  };
  Document doc;
  const auto& id = require("id");
  const auto& ts = require("timestamp");
  const auto& text = require("text");
  const auto& labels = require("labels");
  if (!id.is_string() || !ts.is_string() || !text.is_string() || !labels.is_array()) {
    throw ParseError("line " + std::to_string(line_no) + ": wrong field type");
  }
  doc.id = id.get<std::string>();
  if (doc.id.empty()) {
    throw ParseError("line " + std::to_string(line_no) + ": empty id");
  }
  try {
    doc.timestamp = Date::parse(ts.get<std::string>());
  } catch (const ParseError& e) {
    throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
  }
  doc.text = text.get<std::string>();
  for (const auto& l : labels) {
    if (!l.is_string()) {
      throw ParseError("line " + std::to_string(line_no) + ": labels must be strings");
    }
    doc.labels.push_back(l.get<std::string>());
  }
  if (doc.labels.empty()) {
    throw ValidationError("empty label set at line " + std::to_string(line_no));
  }
  std::sort(doc.labels.begin(), doc.labels.end());
  if (std::adjacent_find(doc.labels.begin(), doc.labels.end()) != doc.labels.end()) {
    throw ValidationError("duplicate label on document at line " + std::to_string(line_no));
  }
  return doc;
}

}  // namespace

Corpus Corpus::load_jsonl(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path);

  std::vector<Document> docs;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB &&
        static_cast<unsigned char>(line[2]) == 0xBF) {
      throw ValidationError("corpus file starts with a UTF-8 byte order mark; "
                            "re-save it without a BOM: " + path);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    docs.push_back(parse_record(line, line_no));
  }

  std::optional<LabelSpace> space;
  if (!options.explicit_labels.empty()) {
    space = LabelSpace(options.explicit_labels);
  }
  return from_documents(std::move(docs), std::move(space));
}

Corpus Corpus::from_documents(std::vector<Document> docs, std::optional<LabelSpace> space) {
  Corpus corpus;
  corpus.docs_ = std::move(docs);
  if (space.has_value()) {
    corpus.labels_ = std::move(*space);
  } else {
    std::set<std::string> observed;
    for (const auto& d : corpus.docs_) {
      observed.insert(d.labels.begin(), d.labels.end());
    }
    if (!corpus.docs_.empty()) {
      corpus.labels_ = LabelSpace(std::vector<std::string>(observed.begin(), observed.end()));
    }
  }
  corpus.finalize();
  return corpus;
}

void Corpus::finalize() {
  std::stable_sort(docs_.begin(), docs_.end(), [](const Document& a, const Document& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.id < b.id;
  });
  by_id_.reserve(docs_.size());
  label_ids_.resize(docs_.size());
  for (size_t i = 0; i < docs_.size(); ++i) {
    const Document& d = docs_[i];
    if (!by_id_.emplace(d.id, i).second) {
      throw ValidationError("duplicate document id '" + d.id + "'");
    }
    if (d.labels.empty()) {
      throw ValidationError("document '" + d.id + "' has an empty label set");
    }
    auto& ids = label_ids_[i];
    ids.reserve(d.labels.size());
    for (const auto& name : d.labels) {
      auto idx = labels_.index_of(name);
      if (!idx) {
        throw ValidationError("document '" + d.id + "' carries label '" + name +
                              "' outside the label space");
      }
      ids.push_back(*idx);
    }
    std::sort(ids.begin(), ids.end());
  }
}

void Corpus::save_jsonl(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file: " + path);
  for (const auto& d : docs_) {
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["timestamp"] = d.timestamp.to_string();
    j["text"] = d.text;
    j["labels"] = d.labels;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed while writing corpus file: " + path);
}

Date Corpus::min_date() const {
  if (docs_.empty()) throw ValidationError("empty corpus has no date range");
  return docs_.front().timestamp;
}

Date Corpus::max_date() const {
  if (docs_.empty()) throw ValidationError("empty corpus has no date range");
  return docs_.back().timestamp;
}

std::span<const Document> Corpus::slice(Date from, Date to) const {
  if (!(from < to)) {
    throw ValidationError("date slice requires from < to, got [" + from.to_string() + ", " +
                          to.to_string() + ")");
  }
  if (docs_.empty()) return {};
  auto lower = std::lower_bound(docs_.begin(), docs_.end(), from,
                                [](const Document& d, Date v) { return d.timestamp < v; });
  auto upper = std::lower_bound(lower, docs_.end(), to,
                                [](const Document& d, Date v) { return d.timestamp < v; });
  return std::span<const Document>(docs_.data() + (lower - docs_.begin()),
                                   static_cast<size_t>(upper - lower));
}

std::optional<size_t> Corpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::span<const Document> slice_by_date(const Corpus& corpus, Date from, Date to) {
  return corpus.slice(from, to);
}

FeatureCache::FeatureCache(const Corpus& corpus, uint32_t dimension)
    : corpus_(&corpus), dimension_(dimension) {
  features_.reserve(corpus.size());
  for (const auto& d : corpus.documents()) {
    features_.push_back(featurize(d.text, dimension));
  }
}

const FeatureVector& FeatureCache::get(const Corpus& corpus, size_t doc_index) const {
  if (&corpus != corpus_ || doc_index >= features_.size()) {
    throw ValidationError("feature cache queried with a foreign corpus or bad index");
  }
  return features_[doc_index];
}

}  // namespace ctsim
