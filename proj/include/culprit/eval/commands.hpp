#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "culprit/env/environment.hpp"
#include "culprit/eval/baseline.hpp"
#include "culprit/eval/metrics.hpp"
#include "culprit/eval/run_config.hpp"
#include "culprit/rl/ddpg_agent.hpp"
#include "culprit/rl/training.hpp"

namespace culprit::eval {

/// CLI exit status for an exception: 1 usage or configuration, 2 data
/// (including I/O, schema and load failures), 3 numeric failure.
int exit_code_for(const std::exception& e) noexcept;

/// A library error tagged with the workflow stage that raised it.
class StageFailure : public std::runtime_error {
public:
  StageFailure(std::string stage, int exit_code, const std::string& message);

  const std::string& stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return exit_code_; }

private:
  std::string stage_;
  int exit_code_;
};

struct PreparedCases {
  std::vector<env::CaseRecord> train, validation, test;
  std::size_t dropped_rows = 0;
};

/// Builds the case list named by the config and splits it. Table sources
/// are scaled and one-hot encoded with statistics from the training rows.
PreparedCases prepare_cases(const RunConfig& config);

struct EvalPoint {
  std::size_t episode = 0;
  MetricsReport metrics;  // on the validation split
};

struct TrainOutcome {
  rl::DdpgAgent agent;
  rl::TrainingHistory history;
  std::vector<EvalPoint> curve;
  MetricsReport test_metrics;
};

/// Trains on `cases.train`, validates on `cases.validation` every
/// `eval_every` episodes with early stopping, and scores the restored best
/// policy on `cases.test`.
TrainOutcome train_agent(const RunConfig& config, const PreparedCases& cases);

struct TrainResult {
  TrainOutcome outcome;
  std::filesystem::path out_dir;
};

/// Artifacts in `out_dir`. Byte-reproducible for a fixed config: config.txt,
/// checkpoint.txt, history.csv, report.txt, test_cases.csv and the plot_*.csv
/// files except plot_timing.csv. Wall-clock data goes to timing.csv,
/// plot_timing.csv, episode_wall_ms.csv and manifest.txt.
TrainResult run_train_command(const RunConfig& config, const std::filesystem::path& out_dir,
                              std::ostream& log);

/// Scores `config.checkpoint` on `config.cases_csv`; writes eval_report.txt.
MetricsReport run_eval_command(const RunConfig& config, const std::filesystem::path& out_dir,
                               std::ostream& log);

struct ExtractResult {
  std::size_t rows = 0;
  std::size_t feature_width = 0;
  std::vector<std::string> skipped;  // file names that could not be used
  std::filesystem::path features_csv;
};

/// One row per readable `.pgm` in `config.image_dir`, in file-name order;
/// writes features.csv and extract_summary.txt.
ExtractResult run_extract_command(const RunConfig& config, const std::filesystem::path& out_dir,
                                  std::ostream& log);

struct BenchResult {
  MetricsReport ddpg;
  MetricsReport ann_baseline;
  rl::TrainingHistory ddpg_history;
  AnnHistory ann_history;
};

/// DDPG against the supervised MLP baseline on identical splits; writes
/// bench_report.txt (both methods), report_<method>.txt, bench_timing.csv
/// and manifest.txt.
BenchResult run_synth_bench_command(const RunConfig& config, const std::filesystem::path& out_dir,
                                    std::ostream& log);

}  // namespace culprit::eval
