/*
 * ctsim -- continuous-training simulation engine, C API.
 *
 * The engine replays a timestamped multilabel-classification deployment:
 * it splits historical data, trains a champion classifier, monitors weekly
 * performance windows, fires retraining triggers (threshold-based or fixed
 * interval), rebuilds splits from newly acquired data, trains challengers,
 * and promotes them when they beat the champion on the fresh test set.
 *
 * All functions return ctsim_status; CTSIM_OK is zero. On failure,
 * ctsim_last_error() returns a thread-local message describing what went
 * wrong. Out-parameters are written only on success. Handles are opaque and
 * must be released with their matching _free function.
 */
#ifndef CTSIM_H
#define CTSIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ctsim_status {
  CTSIM_OK = 0,
  CTSIM_ERR_IO = 1,         /* file missing/unreadable/unwritable */
  CTSIM_ERR_PARSE = 2,      /* malformed JSON/JSONL/CSV input */
  CTSIM_ERR_VALIDATION = 3, /* well-formed input violating a precondition */
  CTSIM_ERR_PARTIAL = 4,    /* run finished but some scenarios failed */
  CTSIM_ERR_INTERNAL = 5    /* unexpected failure */
} ctsim_status;

const char* ctsim_status_name(ctsim_status status);

/* Thread-local message for the most recent failure on this thread. */
const char* ctsim_last_error(void);

const char* ctsim_version(void);

/* ------------------------------------------------------------------ */
/* Corpus                                                              */
/* ------------------------------------------------------------------ */

typedef struct ctsim_corpus ctsim_corpus;

/* Loads a JSON Lines corpus: one {"id","timestamp","text","labels"} object
 * per line. Rejects BOM-prefixed files, duplicate ids, empty label sets and
 * bad dates, reporting line numbers. */
ctsim_status ctsim_corpus_load(const char* jsonl_path, ctsim_corpus** out);

/* Generates a synthetic drifting corpus from a drift-spec JSON file. */
ctsim_status ctsim_corpus_generate(const char* drift_spec_path, ctsim_corpus** out);

ctsim_status ctsim_corpus_save(const ctsim_corpus* corpus, const char* jsonl_path);

int64_t ctsim_corpus_size(const ctsim_corpus* corpus);
int32_t ctsim_corpus_label_count(const ctsim_corpus* corpus);

/* Writes "YYYY-MM-DD" strings (11 bytes including NUL) for the corpus date
 * range. Buffers shorter than 11 bytes are an error. */
ctsim_status ctsim_corpus_date_range(const ctsim_corpus* corpus, char* min_buf,
                                     size_t min_len, char* max_buf, size_t max_len);

void ctsim_corpus_free(ctsim_corpus* corpus);

/* ------------------------------------------------------------------ */
/* Scenario runs                                                       */
/* ------------------------------------------------------------------ */

typedef struct ctsim_run ctsim_run;

typedef struct ctsim_summary_row {
  int32_t scenario_no;
  char data_split[16];   /* "stratified" | "chronological" */
  char finetuning[16];   /* "incremental" | "cumulative" | "checkpoint" */
  char inclusion[20];    /* "new_only" | "new_plus_old" | "new_plus_all_old" */
  char schedule[16];     /* "threshold" | "fixed_interval" | "none" */
  double retraining_time_s;
  int32_t retraining_count;
  double avg_monitoring_performance;
} ctsim_summary_row;

/* Executes every scenario in a run-config JSON file and writes all run
 * artifacts (matrix_summary.csv plus per-scenario logs and manifests) under
 * out_dir. seed_override < 0 keeps the config's seed; workers_override <= 0
 * keeps the config's worker count. Returns CTSIM_ERR_PARTIAL when some (but
 * not all) scenarios failed; *out is still produced in that case. */
ctsim_status ctsim_run_execute(const char* config_path, const char* out_dir,
                               int64_t seed_override, int32_t workers_override,
                               ctsim_run** out);

int32_t ctsim_run_scenario_count(const ctsim_run* run);
int32_t ctsim_run_failure_count(const ctsim_run* run);

/* Summary rows are ordered by scenario number; failed scenarios have no row.
 * index ranges over [0, scenario_count - failure_count). */
ctsim_status ctsim_run_summary_row(const ctsim_run* run, int32_t index,
                                   ctsim_summary_row* out_row);

void ctsim_run_free(ctsim_run* run);

/* ------------------------------------------------------------------ */
/* Reports                                                             */
/* ------------------------------------------------------------------ */

/* Merges a completed run directory into one long-format CSV with columns
 * (scenario_no, week_end, score). Scenarios with missing artifacts are
 * skipped; their count is written to *missing_out when non-NULL. */
ctsim_status ctsim_report_merge(const char* run_dir, const char* out_csv,
                                int32_t* missing_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CTSIM_H */
