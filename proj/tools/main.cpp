// ctsim command line: generate synthetic corpora, run retraining scenario
// matrices, and merge run artifacts into plot-ready CSVs. Talks to the
// engine exclusively through the C API in ctsim.h.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "ctsim.h"

namespace {

// Exit codes: 0 success, 1 partial/runtime failure, 2 usage or validation.
int exit_code_for(ctsim_status status) {
  switch (status) {
    case CTSIM_OK: return 0;
    case CTSIM_ERR_PARTIAL: return 1;
    case CTSIM_ERR_INTERNAL: return 1;
    case CTSIM_ERR_IO:
    case CTSIM_ERR_PARSE:
    case CTSIM_ERR_VALIDATION: return 2;
  }
  return 1;
}

int report_failure(ctsim_status status) {
  std::fprintf(stderr, "error (%s): %s\n", ctsim_status_name(status), ctsim_last_error());
  return exit_code_for(status);
}

int cmd_generate(const std::string& spec_path, const std::string& out_path) {
  ctsim_corpus* corpus = nullptr;
  ctsim_status status = ctsim_corpus_generate(spec_path.c_str(), &corpus);
  if (status != CTSIM_OK) return report_failure(status);
  status = ctsim_corpus_save(corpus, out_path.c_str());
  if (status != CTSIM_OK) {
    ctsim_corpus_free(corpus);
    return report_failure(status);
  }
  char min_date[16], max_date[16];
  ctsim_corpus_date_range(corpus, min_date, sizeof(min_date), max_date, sizeof(max_date));
  std::printf("wrote %lld documents (%d labels, %s .. %s) to %s\n",
              static_cast<long long>(ctsim_corpus_size(corpus)),
              ctsim_corpus_label_count(corpus), min_date, max_date, out_path.c_str());
  ctsim_corpus_free(corpus);
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int64_t seed,
            int32_t workers) {
  ctsim_run* run = nullptr;
  ctsim_status status =
      ctsim_run_execute(config_path.c_str(), out_dir.c_str(), seed, workers, &run);
  if (status != CTSIM_OK && status != CTSIM_ERR_PARTIAL) return report_failure(status);

  const int32_t total = ctsim_run_scenario_count(run);
  const int32_t failed = ctsim_run_failure_count(run);
  std::printf("scenario  split          finetuning   inclusion         schedule        "
              "retrain_s  count  avg_score\n");
  for (int32_t i = 0; i < total - failed; ++i) {
    ctsim_summary_row row;
    if (ctsim_run_summary_row(run, i, &row) != CTSIM_OK) break;
    std::printf("%8d  %-13s  %-11s  %-16s  %-14s  %9.2f  %5d  %9.4f\n", row.scenario_no,
                row.data_split, row.finetuning, row.inclusion, row.schedule,
                row.retraining_time_s, row.retraining_count,
                row.avg_monitoring_performance);
  }
  if (failed > 0) {
    std::fprintf(stderr, "warning: %d of %d scenario(s) failed; see error.txt in the "
                         "scenario directories\n", failed, total);
  }
  std::printf("artifacts written under %s\n", out_dir.c_str());
  ctsim_run_free(run);
  return status == CTSIM_ERR_PARTIAL ? 1 : 0;
}

int cmd_report(const std::string& run_dir, const std::string& out_csv) {
  int32_t missing = 0;
  ctsim_status status = ctsim_report_merge(run_dir.c_str(), out_csv.c_str(), &missing);
  if (status != CTSIM_OK) return report_failure(status);
  if (missing > 0) {
    std::fprintf(stderr, "warning: %d scenario(s) had no monitoring artifacts\n", missing);
  }
  std::printf("wrote %s\n", out_csv.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ctsim - continuous-training retraining-strategy simulator"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::string spec_path, corpus_out;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic drifting corpus");
  generate->add_option("--spec", spec_path, "Drift spec JSON file")->required();
  generate->add_option("--out", corpus_out, "Output corpus path (JSON Lines)")->required();

  std::string config_path, run_out = "run_out";
  int64_t seed = -1;
  int32_t workers = 0;
  auto* run = app.add_subcommand("run", "Run a scenario matrix from a config file");
  run->add_option("--config", config_path, "Run config JSON file")->required();
  run->add_option("--out", run_out, "Output directory for run artifacts");
  run->add_option("--seed", seed, "Override the config seed (>= 0)");
  run->add_option("--workers", workers, "Override the worker count (> 0)");

  std::string run_dir, report_out;
  auto* report = app.add_subcommand("report", "Merge a run directory into one CSV");
  report->add_option("--run-dir", run_dir, "Completed run directory")->required();
  report->add_option("--out", report_out, "Output CSV path (default <run-dir>/plot_data.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (generate->parsed()) return cmd_generate(spec_path, corpus_out);
  if (run->parsed()) return cmd_run(config_path, run_out, seed, workers);
  if (report->parsed()) {
    if (report_out.empty()) report_out = run_dir + "/plot_data.csv";
    return cmd_report(run_dir, report_out);
  }
  return 2;
}
