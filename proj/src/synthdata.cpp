#include "ctsim/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ctsim/error.hpp"
#include "ctsim/rng.hpp"

namespace ctsim {

std::string to_string(DriftKind k) {
  switch (k) {
    case DriftKind::vocabulary_shift: return "vocabulary_shift";
    case DriftKind::label_prior_shift: return "label_prior_shift";
    case DriftKind::label_emergence: return "label_emergence";
  }
  return "?";
}

DriftKind drift_kind_from_string(std::string_view s) {
  if (s == "vocabulary_shift") return DriftKind::vocabulary_shift;
  if (s == "label_prior_shift") return DriftKind::label_prior_shift;
  if (s == "label_emergence") return DriftKind::label_emergence;
  throw ValidationError("unknown drift kind '" + std::string(s) + "'");
}

void DriftSpec::validate() const {
  if (n_labels < 2) throw ValidationError("need at least two labels");
  if (docs_per_week == 0) throw ValidationError("docs_per_week must be positive");
  if (tokens_per_label == 0) throw ValidationError("tokens_per_label must be positive");
  if (doc_length_min == 0 || doc_length_max < doc_length_min) {
    throw ValidationError("document length bounds are inverted or zero");
  }
  if (!(noise_token_share >= 0.0 && noise_token_share < 1.0)) {
    throw ValidationError("noise_token_share must lie in [0,1)");
  }
  if (noise_token_share > 0.0 && noise_pool_size == 0) {
    throw ValidationError("noise_pool_size must be positive when noise is enabled");
  }
  if (label_count_weights.empty()) {
    throw ValidationError("label_count_weights must not be empty");
  }
  double weight_sum = 0;
  for (double w : label_count_weights) {
    if (w < 0) throw ValidationError("label_count_weights must be non-negative");
    weight_sum += w;
  }
  if (weight_sum <= 0) throw ValidationError("label_count_weights must sum to > 0");
  if (dormant_labels >= n_labels) {
    throw ValidationError("dormant_labels must leave at least one active label");
  }
  if (!(span_start < span_end)) {
    throw ValidationError("corpus span must be non-empty");
  }
  size_t emergences = 0;
  for (const auto& e : events) {
    if (e.date < span_start || !(e.date < span_end)) {
      throw ValidationError("drift event outside corpus span: " + e.date.to_string());
    }
    if (!(e.magnitude > 0.0 && e.magnitude <= 1.0)) {
      throw ValidationError("drift magnitude must lie in (0,1]");
    }
    if (e.kind == DriftKind::label_emergence) ++emergences;
  }
  if (emergences > dormant_labels) {
    throw ValidationError("more label_emergence events than dormant labels");
  }
}

namespace {

std::string label_name(uint32_t label) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "L%02u", label);
  return buf;
}

std::string token_name(uint32_t label, uint32_t generation, uint32_t slot) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "l%02ug%ut%03u", label, generation, slot);
  return buf;
}

/// Weighted sample without replacement of k distinct indices. Returns fewer
/// than k when fewer labels carry positive weight.
std::vector<uint32_t> sample_labels(Rng& rng, const std::vector<double>& prior, size_t k) {
  std::vector<double> weights = prior;
  std::vector<uint32_t> chosen;
  chosen.reserve(k);
  for (size_t pick = 0; pick < k; ++pick) {
    double total = 0;
    for (double w : weights) total += w;
    if (total <= 0) break;
    double r = rng.unit() * total;
    uint32_t selected = static_cast<uint32_t>(weights.size());
    double acc = 0;
    for (uint32_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0) continue;
      selected = i;
      acc += weights[i];
      if (r < acc) break;
    }
    chosen.push_back(selected);
    weights[selected] = 0;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

std::vector<uint64_t> weekly_counts(const DriftSpec& spec) {
  spec.validate();
  std::vector<uint64_t> counts;
  for (Date w = spec.span_start; w < spec.span_end; w = w.plus_weeks(1)) {
    counts.push_back(spec.docs_per_week);
  }
  return counts;
}

Corpus generate(const DriftSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  // Current token pool per label; shifted tokens are replaced by the next
  // generation's names so old and new vocabulary never collide.
  std::vector<std::vector<std::string>> pools(spec.n_labels);
  std::vector<uint32_t> generation(spec.n_labels, 0);
  for (uint32_t l = 0; l < spec.n_labels; ++l) {
    pools[l].reserve(spec.tokens_per_label);
    for (uint32_t t = 0; t < spec.tokens_per_label; ++t) {
      pools[l].push_back(token_name(l, 0, t));
    }
  }
  std::vector<std::string> noise_pool;
  noise_pool.reserve(spec.noise_pool_size);
  for (uint32_t t = 0; t < spec.noise_pool_size; ++t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "noise%04u", t);
    noise_pool.push_back(buf);
  }

  const uint32_t active_at_start = spec.n_labels - spec.dormant_labels;
  std::vector<double> prior(spec.n_labels, 0.0);
  for (uint32_t l = 0; l < active_at_start; ++l) {
    prior[l] = 1.0 / active_at_start;
  }
  uint32_t next_dormant = active_at_start;

  std::vector<DriftEvent> pending = spec.events;
  std::stable_sort(pending.begin(), pending.end(),
                   [](const DriftEvent& a, const DriftEvent& b) { return a.date < b.date; });
  size_t next_event = 0;

  auto apply_event = [&](const DriftEvent& e) {
    switch (e.kind) {
      case DriftKind::vocabulary_shift: {
        for (uint32_t l = 0; l < spec.n_labels; ++l) {
          auto count = static_cast<uint32_t>(
              std::llround(e.magnitude * static_cast<double>(spec.tokens_per_label)));
          count = std::min(count, spec.tokens_per_label);
          if (count == 0) continue;
          ++generation[l];
          // Replace `count` distinct slots with fresh-generation tokens.
          std::vector<uint32_t> slots(spec.tokens_per_label);
          for (uint32_t s = 0; s < spec.tokens_per_label; ++s) slots[s] = s;
          rng.shuffle(slots);
          for (uint32_t s = 0; s < count; ++s) {
            pools[l][slots[s]] = token_name(l, generation[l], slots[s]);
          }
        }
        break;
      }
      case DriftKind::label_prior_shift: {
        std::vector<double> fresh(spec.n_labels, 0.0);
        double total = 0;
        for (uint32_t l = 0; l < spec.n_labels; ++l) {
          if (prior[l] > 0) {
            fresh[l] = -std::log(std::max(rng.unit(), 1e-12));
            total += fresh[l];
          }
        }
        if (total > 0) {
          for (uint32_t l = 0; l < spec.n_labels; ++l) {
            prior[l] = (1.0 - e.magnitude) * prior[l] + e.magnitude * fresh[l] / total;
          }
        }
        break;
      }
      case DriftKind::label_emergence: {
        if (next_dormant >= spec.n_labels) break;  // validated upstream
        for (double& p : prior) p *= (1.0 - e.magnitude);
        prior[next_dormant] = e.magnitude;
        ++next_dormant;
        break;
      }
    }
  };

  std::vector<Document> docs;
  uint64_t doc_counter = 0;
  for (Date week = spec.span_start; week < spec.span_end; week = week.plus_weeks(1)) {
    while (next_event < pending.size() && !(week < pending[next_event].date)) {
      apply_event(pending[next_event]);
      ++next_event;
    }
    const int64_t days_left = days_between(week, spec.span_end);
    const uint64_t week_days = std::min<int64_t>(7, days_left);
    for (uint32_t i = 0; i < spec.docs_per_week; ++i) {
      Document doc;
      doc.timestamp = week.plus_days(static_cast<int64_t>(rng.below(week_days)));
      char idbuf[24];
      std::snprintf(idbuf, sizeof(idbuf), "doc%08llu",
                    static_cast<unsigned long long>(doc_counter++));
      doc.id = idbuf;

      // Label count from the configured distribution.
      double total_w = 0;
      for (double w : spec.label_count_weights) total_w += w;
      double r = rng.unit() * total_w;
      size_t k = spec.label_count_weights.size();
      double acc = 0;
      for (size_t c = 0; c < spec.label_count_weights.size(); ++c) {
        acc += spec.label_count_weights[c];
        if (r < acc) {
          k = c + 1;
          break;
        }
      }
      auto chosen = sample_labels(rng, prior, k);
      for (uint32_t l : chosen) doc.labels.push_back(label_name(l));

      const uint32_t length =
          spec.doc_length_min +
          static_cast<uint32_t>(rng.below(spec.doc_length_max - spec.doc_length_min + 1));
      std::string text;
      text.reserve(length * 10);
      for (uint32_t t = 0; t < length; ++t) {
        if (t) text.push_back(' ');
        if (!noise_pool.empty() && rng.unit() < spec.noise_token_share) {
          text += noise_pool[rng.below(noise_pool.size())];
        } else {
          uint32_t l = chosen[rng.below(chosen.size())];
          text += pools[l][rng.below(pools[l].size())];
        }
      }
      doc.text = std::move(text);
      docs.push_back(std::move(doc));
    }
  }

  std::vector<std::string> names;
  names.reserve(spec.n_labels);
  for (uint32_t l = 0; l < spec.n_labels; ++l) names.push_back(label_name(l));
  return Corpus::from_documents(std::move(docs), LabelSpace(std::move(names)));
}

DriftSpec DriftSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("drift spec must be a JSON object");
  DriftSpec spec;
  auto get_u32 = [&](const char* key, uint32_t& out) {
    if (j.contains(key)) {
      if (!j[key].is_number_unsigned()) {
        throw ParseError(std::string("drift spec field '") + key +
                         "' must be a non-negative integer");
      }
      out = j[key].get<uint32_t>();
    }
  };
  get_u32("n_labels", spec.n_labels);
  get_u32("docs_per_week", spec.docs_per_week);
  get_u32("tokens_per_label", spec.tokens_per_label);
  get_u32("noise_pool_size", spec.noise_pool_size);
  get_u32("doc_length_min", spec.doc_length_min);
  get_u32("doc_length_max", spec.doc_length_max);
  get_u32("dormant_labels", spec.dormant_labels);
  if (j.contains("noise_token_share")) {
    spec.noise_token_share = j["noise_token_share"].get<double>();
  }
  if (j.contains("label_count_weights")) {
    spec.label_count_weights = j["label_count_weights"].get<std::vector<double>>();
  }
  if (!j.contains("span_start") || !j.contains("span_end")) {
    throw ParseError("drift spec needs span_start and span_end dates");
  }
  spec.span_start = Date::parse(j["span_start"].get<std::string>());
  spec.span_end = Date::parse(j["span_end"].get<std::string>());
  if (j.contains("seed")) spec.seed = j["seed"].get<uint64_t>();
  if (j.contains("events")) {
    for (const auto& ev : j["events"]) {
      DriftEvent e;
      e.date = Date::parse(ev.at("date").get<std::string>());
      e.kind = drift_kind_from_string(ev.at("kind").get<std::string>());
      if (ev.contains("magnitude")) e.magnitude = ev["magnitude"].get<double>();
      spec.events.push_back(e);
    }
  }
  spec.validate();
  return spec;
}

DriftSpec DriftSpec::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open drift spec: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid drift spec JSON in " + path + ": " + e.what());
  }
  return from_json(j);
}

nlohmann::ordered_json DriftSpec::to_json() const {
  nlohmann::ordered_json j;
  j["n_labels"] = n_labels;
  j["docs_per_week"] = docs_per_week;
  j["tokens_per_label"] = tokens_per_label;
  j["noise_pool_size"] = noise_pool_size;
  j["noise_token_share"] = noise_token_share;
  j["doc_length_min"] = doc_length_min;
  j["doc_length_max"] = doc_length_max;
  j["label_count_weights"] = label_count_weights;
  j["dormant_labels"] = dormant_labels;
  j["span_start"] = span_start.to_string();
  j["span_end"] = span_end.to_string();
  j["seed"] = seed;
  auto events_json = nlohmann::ordered_json::array();
  for (const auto& e : events) {
    events_json.push_back({{"date", e.date.to_string()},
                           {"kind", to_string(e.kind)},
                           {"magnitude", e.magnitude}});
  }
  j["events"] = events_json;
  return j;
}

}  // namespace ctsim
