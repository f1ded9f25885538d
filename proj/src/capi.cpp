#include "ctsim.h"

#include <cstring>
#include <string>
#include <vector>

#include "ctsim/corpus.hpp"
#include "ctsim/error.hpp"
#include "ctsim/run_io.hpp"
#include "ctsim/synthdata.hpp"

namespace {

thread_local std::string g_last_error;

ctsim_status fail(ctsim_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

/// Runs fn, mapping exceptions onto status codes.
template <class Fn>
ctsim_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ctsim::IoError& e) {
    return fail(CTSIM_ERR_IO, e.what());
  } catch (const ctsim::ParseError& e) {
    return fail(CTSIM_ERR_PARSE, e.what());
  } catch (const ctsim::ValidationError& e) {
    return fail(CTSIM_ERR_VALIDATION, e.what());
  } catch (const std::exception& e) {
    return fail(CTSIM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CTSIM_ERR_INTERNAL, "unknown error");
  }
}

void copy_field(char* dst, size_t dst_len, const std::string& src) {
  std::snprintf(dst, dst_len, "%s", src.c_str());
}

}  // namespace

struct ctsim_corpus {
  ctsim::Corpus corpus;
};

struct ctsim_run {
  ctsim::RunResult result;
  std::vector<ctsim_summary_row> rows;
};

extern "C" {

const char* ctsim_status_name(ctsim_status status) {
  switch (status) {
    case CTSIM_OK: return "ok";
    case CTSIM_ERR_IO: return "io_error";
    case CTSIM_ERR_PARSE: return "parse_error";
    case CTSIM_ERR_VALIDATION: return "validation_error";
    case CTSIM_ERR_PARTIAL: return "partial_failure";
    case CTSIM_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* ctsim_last_error(void) { return g_last_error.c_str(); }

const char* ctsim_version(void) { return "1.0.0"; }

ctsim_status ctsim_corpus_load(const char* jsonl_path, ctsim_corpus** out) {
  if (!jsonl_path || !out) return fail(CTSIM_ERR_VALIDATION, "null argument");
  return guarded([&] {
    auto handle = new ctsim_corpus{ctsim::Corpus::load_jsonl(jsonl_path)};
    *out = handle;
    return CTSIM_OK;
  });
}

ctsim_status ctsim_corpus_generate(const char* drift_spec_path, ctsim_corpus** out) {
  if (!drift_spec_path || !out) return fail(CTSIM_ERR_VALIDATION, "null argument");
  return guarded([&] {
    auto spec = ctsim::DriftSpec::from_json_file(drift_spec_path);
    auto handle = new ctsim_corpus{ctsim::generate(spec)};
    *out = handle;
    return CTSIM_OK;
  });
}

ctsim_status ctsim_corpus_save(const ctsim_corpus* corpus, const char* jsonl_path) {
  if (!corpus || !jsonl_path) return fail(CTSIM_ERR_VALIDATION, "null argument");
  return guarded([&] {
    corpus->corpus.save_jsonl(jsonl_path);
    return CTSIM_OK;
  });
}

int64_t ctsim_corpus_size(const ctsim_corpus* corpus) {
  return corpus ? static_cast<int64_t>(corpus->corpus.size()) : -1;
}

int32_t ctsim_corpus_label_count(const ctsim_corpus* corpus) {
  return corpus ? static_cast<int32_t>(corpus->corpus.label_space().size()) : -1;
}

ctsim_status ctsim_corpus_date_range(const ctsim_corpus* corpus, char* min_buf,
                                     size_t min_len, char* max_buf, size_t max_len) {
  if (!corpus || !min_buf || !max_buf) return fail(CTSIM_ERR_VALIDATION, "null argument");
  if (min_len < 11 || max_len < 11) {
    return fail(CTSIM_ERR_VALIDATION, "date buffers must hold at least 11 bytes");
  }
  return guarded([&] {
    copy_field(min_buf, min_len, corpus->corpus.min_date().to_string());
    copy_field(max_buf, max_len, corpus->corpus.max_date().to_string());
    return CTSIM_OK;
  });
}

void ctsim_corpus_free(ctsim_corpus* corpus) { delete corpus; }

ctsim_status ctsim_run_execute(const char* config_path, const char* out_dir,
                               int64_t seed_override, int32_t workers_override,
                               ctsim_run** out) {
  if (!config_path || !out_dir || !out) return fail(CTSIM_ERR_VALIDATION, "null argument");
  return guarded([&]() -> ctsim_status {
    auto config = ctsim::RunConfig::from_json_file(config_path);
    std::optional<uint64_t> seed;
    if (seed_override >= 0) seed = static_cast<uint64_t>(seed_override);
    std::optional<uint32_t> workers;
    if (workers_override > 0) workers = static_cast<uint32_t>(workers_override);

    auto handle = std::make_unique<ctsim_run>();
    handle->result = ctsim::execute_run(config, out_dir, seed, workers);

    // Rows in scenario-number order, mirroring matrix_summary.csv.
    std::vector<size_t> order(handle->result.outcomes.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      const auto& ra = handle->result.outcomes[a].report;
      const auto& rb = handle->result.outcomes[b].report;
      const int na = ra ? ra->scenario.scenario_no : 1000 + static_cast<int>(a);
      const int nb = rb ? rb->scenario.scenario_no : 1000 + static_cast<int>(b);
      return na < nb;
    });
    for (size_t idx : order) {
      const auto& outcome = handle->result.outcomes[idx];
      if (!outcome.report) continue;
      const auto& report = *outcome.report;
      ctsim_summary_row row{};
      row.scenario_no = report.scenario.scenario_no;
      copy_field(row.data_split, sizeof(row.data_split),
                 ctsim::to_string(report.scenario.split_strategy));
      copy_field(row.finetuning, sizeof(row.finetuning),
                 ctsim::to_string(report.scenario.finetune));
      copy_field(row.inclusion, sizeof(row.inclusion),
                 ctsim::to_string(report.scenario.inclusion));
      copy_field(row.schedule, sizeof(row.schedule),
                 ctsim::to_string(report.scenario.schedule));
      row.retraining_time_s = report.total_retraining_seconds;
      row.retraining_count = static_cast<int32_t>(report.retraining_count);
      row.avg_monitoring_performance = report.avg_monitoring_performance;
      handle->rows.push_back(row);
    }

    const size_t failures = handle->result.failure_count;
    *out = handle.release();
    if (failures > 0) {
      return fail(CTSIM_ERR_PARTIAL, std::to_string(failures) + " scenario(s) failed");
    }
    return CTSIM_OK;
  });
}

int32_t ctsim_run_scenario_count(const ctsim_run* run) {
  return run ? static_cast<int32_t>(run->result.scenario_count) : -1;
}

int32_t ctsim_run_failure_count(const ctsim_run* run) {
  return run ? static_cast<int32_t>(run->result.failure_count) : -1;
}

ctsim_status ctsim_run_summary_row(const ctsim_run* run, int32_t index,
                                   ctsim_summary_row* out_row) {
  if (!run || !out_row) return fail(CTSIM_ERR_VALIDATION, "null argument");
  if (index < 0 || static_cast<size_t>(index) >= run->rows.size()) {
    return fail(CTSIM_ERR_VALIDATION, "summary row index out of range");
  }
  *out_row = run->rows[static_cast<size_t>(index)];
  return CTSIM_OK;
}

void ctsim_run_free(ctsim_run* run) { delete run; }

ctsim_status ctsim_report_merge(const char* run_dir, const char* out_csv,
                                int32_t* missing_out) {
  if (!run_dir || !out_csv) return fail(CTSIM_ERR_VALIDATION, "null argument");
  return guarded([&] {
    size_t missing = ctsim::merge_report(run_dir, out_csv);
    if (missing_out) *missing_out = static_cast<int32_t>(missing);
    return CTSIM_OK;
  });
}

}  // extern "C"
