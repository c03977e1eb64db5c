#include "culprit/eval/commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "culprit/data/table.hpp"
#include "culprit/detail/seed.hpp"
#include "culprit/errors.hpp"
#include "culprit/nn/serialize.hpp"
#include "culprit/vision/descriptors.hpp"
#include "culprit/vision/image.hpp"

namespace culprit::eval {

namespace fs = std::filesystem;

namespace {

// Seed streams derived from RunConfig::seed. The agent mixes its own
// streams internally from the raw seed.
enum SeedStream : std::uint64_t { kSynthData = 10, kSplit = 11, kEnvOrder = 12, kAnn = 13 };

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageFailure&) {
    throw;
  } catch (const Error& e) {
    throw StageFailure(name, exit_code_for(e), e.what());
  } catch (const fs::filesystem_error& e) {
    throw StageFailure(name, 2, e.what());
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  return os;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError(fmt::format("cannot create output directory '{}'", dir.string()));
  }
}

std::string utc_now() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

void write_manifest(const fs::path& dir, const std::string& command, double total_ms,
                    const std::vector<std::string>& reproducible,
                    const std::vector<std::string>& wall_clock) {
  auto os = open_out(dir / "manifest.txt");
  os << "command = " << command << '\n';
  os << "created_utc = " << utc_now() << '\n';
  os << "total_wall_ms = " << nn::format_real(total_ms) << '\n';
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s;
  };
  os << "reproducible = " << join(reproducible) << '\n';
  os << "wall_clock = " << join(wall_clock) << '\n';
}

void write_plot(const fs::path& path, const char* y_name,
                const std::vector<std::pair<std::size_t, double>>& points) {
  auto os = open_out(path);
  os << "episode," << y_name << '\n';
  for (const auto& [x, y] : points) os << x << ',' << nn::format_real(y) << '\n';
}

std::vector<env::CaseRecord> pick(const std::vector<env::CaseRecord>& all,
                                  const std::vector<std::size_t>& idx) {
  std::vector<env::CaseRecord> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

PreparedCases split_records(std::vector<env::CaseRecord> all, const RunConfig& config,
                            std::size_t dropped) {
  const data::SplitIndices idx = data::split_indices(
      all.size(), {config.validation_fraction, config.test_fraction, detail::mix_seed(config.seed, kSplit)});
  return {pick(all, idx.train), pick(all, idx.validation), pick(all, idx.test), dropped};
}

PreparedCases prepare_table(const RunConfig& config) {
  const data::Schema schema = data::load_schema(config.schema);
  const data::RawTable table = data::load_csv(config.table_csv, schema);
  data::Splits s = data::split(
      table, {config.validation_fraction, config.test_fraction, detail::mix_seed(config.seed, kSplit)});
  if (s.train.size() == 0) throw DataError("table source: training split is empty");
  if (config.scaler) {
    const data::ScalerStats stats = data::fit_scaler(s.train, *config.scaler);
    s.train = data::apply_scaler(s.train, stats);
    s.validation = data::apply_scaler(s.validation, stats);
    s.test = data::apply_scaler(s.test, stats);
  }
  const data::OneHotVocabulary vocab = data::fit_one_hot(s.train);
  auto records = [&](const data::RawTable& t) {
    return data::to_case_records(data::apply_one_hot(t, vocab), config.label_column, config.n_suspects);
  };
  return {records(s.train), records(s.validation), records(s.test), table.dropped_rows};
}

void write_train_report(std::ostream& os, const TrainOutcome& o, std::size_t dropped_rows) {
  os << "method = ddpg\n";
  os << "split = test\n";
  os << "dropped_rows = " << dropped_rows << '\n';
  os << "episodes_run = " << o.history.episodes.size() << '\n';
  os << "stopped_early = " << (o.history.stopped_early ? "true" : "false") << '\n';
  if (o.history.best_episode) {
    os << "best_episode = " << *o.history.best_episode << '\n';
    os << "best_validation_accuracy = " << nn::format_real(o.history.best_score) << '\n';
  } else {
    os << "best_episode = none\n";
  }
  write_metrics(os, o.test_metrics);
}

void write_timing_csv(const fs::path& path, const rl::PhaseTiming& t) {
  auto os = open_out(path);
  os << "phase,wall_ms,count\n";
  os << "train_step," << nn::format_real(t.train_step_ms) << ',' << t.train_steps << '\n';
  os << "episode," << nn::format_real(t.episode_ms) << ',' << t.episodes << '\n';
  os << "evaluation," << nn::format_real(t.evaluation_ms) << ',' << t.evaluations << '\n';
  os << "total," << nn::format_real(t.total_ms) << ",1\n";
}

}  // namespace

int exit_code_for(const std::exception& e) noexcept {
  if (const auto* s = dynamic_cast<const StageFailure*>(&e)) return s->exit_code();
  if (dynamic_cast<const NumericError*>(&e)) return 3;
  if (dynamic_cast<const DataError*>(&e)) return 2;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return 2;
  return 1;
}

StageFailure::StageFailure(std::string stage, int exit_code, const std::string& message)
    : std::runtime_error(fmt::format("stage '{}' failed: {}", stage, message)),
      stage_(std::move(stage)),
      exit_code_(exit_code) {}

PreparedCases prepare_cases(const RunConfig& config) {
  switch (config.source) {
    case CaseSource::Synthetic: {
      env::SyntheticSpec spec;
      spec.n_cases = config.n_cases;
      spec.n_features = config.n_features;
      spec.n_suspects = config.n_suspects;
      spec.noise = config.noise;
      spec.seed = detail::mix_seed(config.seed, kSynthData);
      return split_records(env::make_synthetic_cases(spec), config, 0);
    }
    case CaseSource::Cases: {
      data::CaseFile file = data::load_cases_csv(config.cases_csv);
      if (file.records.empty()) {
        throw DataError(fmt::format("'{}' holds no usable cases", config.cases_csv.string()));
      }
      return split_records(std::move(file.records), config, file.dropped_rows);
    }
    case CaseSource::Table:
      return prepare_table(config);
  }
  throw ConfigError("unknown case source");
}

TrainOutcome train_agent(const RunConfig& config, const PreparedCases& cases) {
  if (cases.train.empty()) throw DataError("training split is empty");
  if (cases.test.empty()) throw DataError("test split is empty; raise test_fraction or n_cases");
  env::CaseEnvironment environment(cases.train, detail::mix_seed(config.seed, kEnvOrder));
  TrainOutcome out{rl::DdpgAgent(config.agent_config(environment.state_dim(), environment.action_dim())),
                   {},
                   {},
                   {}};

  rl::TrainingOptions options;
  options.episodes = config.episodes;
  options.max_steps = config.max_steps;
  options.eval_every = cases.validation.empty() ? 0 : config.eval_every;
  options.early_stop.patience = config.patience;
  options.validate = [&](const rl::PolicySnapshot& policy) {
    EvalPoint p;
    p.episode = (out.curve.size() + 1) * config.eval_every - 1;
    p.metrics = compute_metrics(evaluate(policy, cases.validation));
    out.curve.push_back(p);
    return p.metrics.accuracy;
  };
  out.history = rl::run_training(out.agent, environment, options);
  out.test_metrics = compute_metrics(evaluate(out.agent.snapshot(), cases.test));
  return out;
}

TrainResult run_train_command(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
  const auto t0 = Clock::now();
  stage("config", [&] { config.validate(); });
  stage("output", [&] { ensure_dir(out_dir); });
  const PreparedCases cases = stage("load data", [&] { return prepare_cases(config); });
  fmt::print(log, "cases: {} train / {} validation / {} test ({} rows dropped)\n", cases.train.size(),
             cases.validation.size(), cases.test.size(), cases.dropped_rows);

  TrainResult result{stage("train", [&] { return train_agent(config, cases); }), out_dir};
  const TrainOutcome& o = result.outcome;
  fmt::print(log, "trained {} episodes{}; test accuracy {}\n", o.history.episodes.size(),
             o.history.stopped_early ? " (early stop)" : "", nn::format_real(o.test_metrics.accuracy));

  stage("write artifacts", [&] {
    {
      auto os = open_out(out_dir / "config.txt");
      write_run_config(os, config);
    }
    o.agent.save((out_dir / "checkpoint.txt").string());
    rl::write_history_csv((out_dir / "history.csv").string(), o.history, false);
    {
      auto os = open_out(out_dir / "report.txt");
      write_train_report(os, o, cases.dropped_rows);
    }
    data::write_cases_csv(out_dir / "test_cases.csv", cases.test);

    std::vector<std::pair<std::size_t, double>> acc, prec, rec, f1, ret, loss, wall;
    for (const EvalPoint& p : o.curve) {
      acc.emplace_back(p.episode, p.metrics.accuracy);
      prec.emplace_back(p.episode, p.metrics.macro_precision);
      rec.emplace_back(p.episode, p.metrics.macro_recall);
      f1.emplace_back(p.episode, p.metrics.macro_f1);
    }
    double cumulative = 0.0;
    for (const rl::EpisodeRecord& e : o.history.episodes) {
      ret.emplace_back(e.episode, e.episode_return);
      if (e.critic_loss) loss.emplace_back(e.episode, *e.critic_loss);
      cumulative += e.wall_ms;
      wall.emplace_back(e.episode, cumulative);
    }
    write_plot(out_dir / "plot_accuracy.csv", "accuracy", acc);
    write_plot(out_dir / "plot_precision.csv", "macro_precision", prec);
    write_plot(out_dir / "plot_recall.csv", "macro_recall", rec);
    write_plot(out_dir / "plot_f1.csv", "macro_f1", f1);
    write_plot(out_dir / "plot_return.csv", "return", ret);
    write_plot(out_dir / "plot_critic_loss.csv", "critic_loss", loss);
    write_plot(out_dir / "plot_timing.csv", "cumulative_wall_ms", wall);

    write_timing_csv(out_dir / "timing.csv", o.history.timing);
    {
      auto os = open_out(out_dir / "episode_wall_ms.csv");
      os << "episode,wall_ms\n";
      for (const auto& e : o.history.episodes) os << e.episode << ',' << nn::format_real(e.wall_ms) << '\n';
    }
    write_manifest(out_dir, "train", ms_since(t0),
                   {"config.txt", "checkpoint.txt", "history.csv", "report.txt", "test_cases.csv",
                    "plot_accuracy.csv", "plot_precision.csv", "plot_recall.csv", "plot_f1.csv",
                    "plot_return.csv", "plot_critic_loss.csv"},
                   {"timing.csv", "episode_wall_ms.csv", "plot_timing.csv", "manifest.txt"});
  });
  fmt::print(log, "artifacts written to {}\n", out_dir.string());
  return result;
}

MetricsReport run_eval_command(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
  const auto t0 = Clock::now();
  stage("config", [&] {
    if (config.checkpoint.empty()) throw ConfigError("eval needs a checkpoint");
    if (config.cases_csv.empty()) throw ConfigError("eval needs cases_csv");
  });
  stage("output", [&] { ensure_dir(out_dir); });
  const rl::DdpgAgent agent =
      stage("load checkpoint", [&] { return rl::DdpgAgent::load(config.checkpoint.string()); });
  const data::CaseFile file = stage("load data", [&] { return data::load_cases_csv(config.cases_csv); });
  const MetricsReport report =
      stage("evaluate", [&] { return compute_metrics(evaluate(agent.snapshot(), file.records)); });
  stage("write artifacts", [&] {
    {
      auto os = open_out(out_dir / "eval_report.txt");
      os << "method = ddpg\n";
      os << "split = " << config.cases_csv.filename().string() << '\n';
      os << "dropped_rows = " << file.dropped_rows << '\n';
      write_metrics(os, report);
    }
    write_manifest(out_dir, "eval", ms_since(t0), {"eval_report.txt"}, {"manifest.txt"});
  });
  fmt::print(log, "evaluated {} cases: accuracy {}\n", report.n_cases, nn::format_real(report.accuracy));
  return report;
}

ExtractResult run_extract_command(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
  const auto t0 = Clock::now();
  const bool lbp = config.descriptor != "HOG";
  const bool hog = config.descriptor != "LBP";
  stage("config", [&] {
    if (config.image_dir.empty()) throw ConfigError("extract-features needs image_dir");
    if (config.descriptor != "LBP" && config.descriptor != "HOG" && config.descriptor != "CONCAT") {
      throw ConfigError(fmt::format("unknown descriptor '{}'", config.descriptor));
    }
    if (config.hog_cell_size == 0) throw ConfigError("hog_cell_size must be positive");
  });
  stage("output", [&] { ensure_dir(out_dir); });

  const std::vector<fs::path> files = stage("list images", [&] {
    if (!fs::is_directory(config.image_dir)) {
      throw IoError(fmt::format("image directory '{}' does not exist", config.image_dir.string()));
    }
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(config.image_dir)) {
      std::string ext = entry.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
      if (entry.is_regular_file() && ext == ".pgm") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    return out;
  });

  ExtractResult result;
  result.feature_width = hog ? 0 : vision::kLbpBins;
  std::vector<std::pair<std::string, nn::Vector>> rows;
  for (const fs::path& file : files) {
    try {
      const vision::GrayImage img = vision::read_pgm(file);
      std::vector<vision::FeatureVector> parts;
      if (lbp) parts.push_back(vision::to_feature(vision::lbp_histogram(img)));
      if (hog) parts.push_back(vision::to_feature(vision::hog_descriptor(img, config.hog_cell_size, 9)));
      nn::Vector v = parts.size() == 1 ? std::move(parts.front().values) : vision::concat_features(parts).values;
      if (hog && result.feature_width == 0) result.feature_width = v.size();
      if (v.size() != result.feature_width) {
        throw DataError(fmt::format("{} features where earlier images gave {}", v.size(), result.feature_width));
      }
      rows.emplace_back(file.filename().string(), std::move(v));
    } catch (const Error& e) {
      result.skipped.push_back(file.filename().string());
      fmt::print(log, "skipped {}: {}\n", file.filename().string(), e.what());
    }
  }
  result.rows = rows.size();
  result.features_csv = out_dir / "features.csv";

  stage("write artifacts", [&] {
    {
      auto os = open_out(result.features_csv);
      os << "file";
      for (std::size_t i = 0; i < result.feature_width; ++i) os << ",f" << i;
      os << '\n';
      for (const auto& [name, v] : rows) {
        os << data::csv_escape(name);
        for (double x : v) os << ',' << nn::format_real(x);
        os << '\n';
      }
    }
    {
      auto os = open_out(out_dir / "extract_summary.txt");
      os << "descriptor = " << config.descriptor << '\n';
      os << "images_found = " << files.size() << '\n';
      os << "rows_written = " << result.rows << '\n';
      os << "skipped = " << result.skipped.size() << '\n';
      for (std::size_t i = 0; i < result.skipped.size(); ++i) {
        os << "skipped." << i << " = " << result.skipped[i] << '\n';
      }
    }
    write_manifest(out_dir, "extract-features", ms_since(t0), {"features.csv", "extract_summary.txt"},
                   {"manifest.txt"});
  });
  fmt::print(log, "{} rows written, {} skipped\n", result.rows, result.skipped.size());
  return result;
}

BenchResult run_synth_bench_command(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
  const auto t0 = Clock::now();
  stage("config", [&] { config.validate(); });
  stage("output", [&] { ensure_dir(out_dir); });
  const PreparedCases cases = stage("load data", [&] { return prepare_cases(config); });

  BenchResult result;
  const auto ddpg_start = Clock::now();
  TrainOutcome ddpg = stage("train ddpg", [&] { return train_agent(config, cases); });
  const double ddpg_ms = ms_since(ddpg_start);
  result.ddpg = ddpg.test_metrics;
  result.ddpg_history = ddpg.history;
  fmt::print(log, "ddpg: {} episodes, test accuracy {}\n", ddpg.history.episodes.size(),
             nn::format_real(result.ddpg.accuracy));

  const auto ann_start = Clock::now();
  AnnResult ann = stage("train ann_baseline", [&] {
    AnnOptions opts;
    opts.hidden = config.hidden;
    opts.learning_rate = config.ann_lr;
    opts.batch_size = config.ann_batch_size;
    opts.max_epochs = config.ann_epochs;
    opts.early_stop.patience = config.patience;
    opts.seed = detail::mix_seed(config.seed, kAnn);
    return train_ann(cases.train, cases.validation, opts);
  });
  const double ann_train_ms = ms_since(ann_start);
  const auto ann_eval_start = Clock::now();
  result.ann_baseline = stage("evaluate ann_baseline", [&] {
    return compute_metrics(evaluate_scorer([&](std::span<const double> x) { return ann.model.scores(x); },
                                           ann.model.net.input_dim(), cases.test));
  });
  const double ann_eval_ms = ms_since(ann_eval_start);
  result.ann_history = ann.history;
  fmt::print(log, "ann_baseline: {} epochs, test accuracy {}\n", ann.history.train_loss.size(),
             nn::format_real(result.ann_baseline.accuracy));

  stage("write artifacts", [&] {
    {
      auto os = open_out(out_dir / "config.txt");
      write_run_config(os, config);
    }
    {
      auto os = open_out(out_dir / "bench_report.txt");
      os << "methods = ddpg,ann_baseline\n";
      os << "split = test\n";
      os << "n_train = " << cases.train.size() << '\n';
      os << "n_validation = " << cases.validation.size() << '\n';
      os << "n_test = " << cases.test.size() << '\n';
      os << "ddpg.episodes_run = " << ddpg.history.episodes.size() << '\n';
      write_metrics(os, result.ddpg, "ddpg");
      os << "ann_baseline.epochs_run = " << ann.history.train_loss.size() << '\n';
      write_metrics(os, result.ann_baseline, "ann_baseline");
    }
    {
      auto os = open_out(out_dir / "report_ddpg.txt");
      write_train_report(os, ddpg, cases.dropped_rows);
    }
    {
      auto os = open_out(out_dir / "report_ann_baseline.txt");
      os << "method = ann_baseline\n";
      os << "split = test\n";
      os << "epochs_run = " << ann.history.train_loss.size() << '\n';
      os << "best_epoch = " << ann.history.best_epoch << '\n';
      write_metrics(os, result.ann_baseline);
    }
    ddpg.agent.save((out_dir / "checkpoint.txt").string());
    {
      auto os = open_out(out_dir / "ann_model.txt");
      nn::write_mlp(os, ann.model.net);
    }
    {
      std::vector<std::pair<std::size_t, double>> ddpg_acc, ann_acc;
      for (const EvalPoint& p : ddpg.curve) ddpg_acc.emplace_back(p.episode, p.metrics.accuracy);
      for (std::size_t e = 0; e < ann.history.validation_accuracy.size(); ++e) {
        ann_acc.emplace_back(e, ann.history.validation_accuracy[e]);
      }
      write_plot(out_dir / "plot_ddpg_accuracy.csv", "accuracy", ddpg_acc);
      auto os = open_out(out_dir / "plot_ann_accuracy.csv");
      os << "epoch,accuracy\n";
      for (const auto& [x, y] : ann_acc) os << x << ',' << nn::format_real(y) << '\n';
    }
    {
      auto os = open_out(out_dir / "bench_timing.csv");
      os << "method,phase,wall_ms,count\n";
      const auto& t = ddpg.history.timing;
      os << "ddpg,train_step," << nn::format_real(t.train_step_ms) << ',' << t.train_steps << '\n';
      os << "ddpg,episode," << nn::format_real(t.episode_ms) << ',' << t.episodes << '\n';
      os << "ddpg,evaluation," << nn::format_real(t.evaluation_ms) << ',' << t.evaluations << '\n';
      os << "ddpg,total," << nn::format_real(ddpg_ms) << ",1\n";
      os << "ann_baseline,train," << nn::format_real(ann_train_ms) << ',' << ann.history.train_loss.size() << '\n';
      os << "ann_baseline,evaluation," << nn::format_real(ann_eval_ms) << ",1\n";
      os << "ann_baseline,total," << nn::format_real(ann_train_ms + ann_eval_ms) << ",1\n";
    }
    write_manifest(out_dir, "synth-bench", ms_since(t0),
                   {"config.txt", "bench_report.txt", "report_ddpg.txt", "report_ann_baseline.txt",
                    "checkpoint.txt", "ann_model.txt", "plot_ddpg_accuracy.csv", "plot_ann_accuracy.csv"},
                   {"bench_timing.csv", "manifest.txt"});
  });
  return result;
}

}  // namespace culprit::eval
