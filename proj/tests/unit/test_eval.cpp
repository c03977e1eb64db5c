#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "culprit/data/table.hpp"
#include "culprit/errors.hpp"
#include "culprit/eval/baseline.hpp"
#include "culprit/eval/commands.hpp"
#include "culprit/eval/early_stop.hpp"
#include "culprit/eval/metrics.hpp"
#include "culprit/eval/run_config.hpp"
#include "culprit/vision/image.hpp"

using namespace culprit;
using namespace culprit::eval;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("culprit_eval_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ConfusionCounts one_class(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  ConfusionCounts c(1);
  c.classes[0] = {tp, fp, fn, tn};
  c.n_cases = tp + fp + fn + tn;
  c.correct = tp;
  return c;
}

// Policy whose actor is a single linear tanh layer with the given weights.
rl::PolicySnapshot linear_policy(nn::Matrix w) {
  const std::size_t out = w.rows();
  return {nn::Mlp{{nn::DenseLayer{std::move(w), nn::Vector(out, 0.0), nn::Activation::Tanh}}}};
}

env::CaseRecord one_hot_case(std::size_t n, std::size_t culprit) {
  env::CaseRecord c;
  c.case_id = std::to_string(culprit);
  c.n_suspects = n;
  c.culprit_index = culprit;
  c.features.values.assign(n, 0.0);
  c.features.values[culprit] = 1.0;
  return c;
}

RunConfig quick_config() {
  RunConfig c;
  c.n_cases = 80;
  c.n_features = 8;
  c.episodes = 120;
  c.eval_every = 40;
  c.hidden = {16, 16};
  c.batch_size = 16;
  c.buffer_capacity = 500;
  c.seed = 3;
  return c;
}

void write_gradient_pgm(const fs::path& p, std::size_t w, std::size_t h, int phase) {
  vision::GrayImage img(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) img.at(x, y) = static_cast<std::uint8_t>((x * 13 + y * 7 + phase) % 256);
  }
  vision::write_pgm(p, img);
}

}  // namespace

// ---------------------------------------------------------------- metrics

TEST_CASE("tp=9 fp=1 fn=1 gives 0.9 everywhere") {
  const MetricsReport r = compute_metrics(one_class(9, 1, 1, 0));
  CHECK(r.per_class[0].precision == 0.9);
  CHECK(r.per_class[0].recall == 0.9);
  CHECK(r.per_class[0].f1 == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("class never predicted and never present scores zero") {
  ConfusionCounts c = tally(std::vector<std::size_t>{0, 0, 1}, std::vector<std::size_t>{0, 0, 1}, 3);
  const MetricsReport r = compute_metrics(c);
  CHECK(r.per_class[2].precision == 0.0);
  CHECK(r.per_class[2].recall == 0.0);
  CHECK(r.per_class[2].f1 == 0.0);
  CHECK(r.accuracy == 1.0);
  CHECK(r.macro_f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("binary tp=50 fp=0 fn=50") {
  const MetricsReport r = compute_metrics(one_class(50, 0, 50, 0));
  CHECK(r.per_class[0].precision == 1.0);
  CHECK(r.per_class[0].recall == 0.5);
  CHECK(r.per_class[0].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(compute_metrics(ConfusionCounts(3)), DataError);
}

TEST_CASE("confusion identities and brute-force recount over 1000 random tables") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng() % 5;
    const std::size_t n = 1 + rng() % 60;
    std::uniform_int_distribution<std::size_t> cls(0, k - 1);
    std::vector<std::size_t> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = cls(rng);
      pred[i] = (rng() % 3 == 0) ? cls(rng) : truth[i];
    }
    const ConfusionCounts c = tally(truth, pred, k);
    std::size_t tp_sum = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const auto& cc = c.classes[j];
      CHECK(cc.tp + cc.fp + cc.fn + cc.tn == n);
      tp_sum += cc.tp;
      std::size_t tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        tp += truth[i] == j && pred[i] == j;
        fp += truth[i] != j && pred[i] == j;
        fn += truth[i] == j && pred[i] != j;
      }
      CHECK(cc.tp == tp);
      CHECK(cc.fp == fp);
      CHECK(cc.fn == fn);
    }
    const MetricsReport r = compute_metrics(c);
    double correct = 0.0;
    for (std::size_t i = 0; i < n; ++i) correct += truth[i] == pred[i] ? 1.0 : 0.0;
    CHECK(tp_sum == c.correct);
    CHECK(r.accuracy == correct / static_cast<double>(n));

    double lo = 1.0, hi = 0.0;
    for (const auto& m : r.per_class) {
      lo = std::min(lo, m.f1);
      hi = std::max(hi, m.f1);
    }
    CHECK(r.macro_f1 <= hi + 1e-15);
    CHECK(r.macro_f1 >= lo - 1e-15);

    // permutation invariance
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> t2(n), p2(n);
    for (std::size_t i = 0; i < n; ++i) {
      t2[i] = truth[order[i]];
      p2[i] = pred[order[i]];
    }
    CHECK(compute_metrics(tally(t2, p2, k)) == r);
  }
}

TEST_CASE("evaluate: perfect policy, constant policy, empty list") {
  const std::size_t n = 4;
  nn::Matrix identity(n, n);
  for (std::size_t i = 0; i < n; ++i) identity(i, i) = 1.0;
  std::vector<env::CaseRecord> cases;
  for (std::size_t i = 0; i < 12; ++i) cases.push_back(one_hot_case(n, i % n));

  const MetricsReport perfect = compute_metrics(evaluate(linear_policy(identity), cases));
  CHECK(perfect.accuracy == 1.0);
  for (const auto& m : perfect.per_class) CHECK(m.f1 == 1.0);

  nn::Matrix zero(n, n);  // tanh(0) everywhere, ties go to suspect 0
  const ConfusionCounts constant = evaluate(linear_policy(zero), cases);
  CHECK(compute_metrics(constant).accuracy == 0.25);
  CHECK(constant.classes[0].fp == 9);

  CHECK_THROWS_AS(evaluate(linear_policy(identity), std::vector<env::CaseRecord>{}), DataError);
  CHECK_THROWS_AS(evaluate(linear_policy(nn::Matrix(n, 3)), cases), ConfigError);
}

TEST_CASE("metrics report lists macro averaging") {
  std::ostringstream os;
  write_metrics(os, compute_metrics(one_class(9, 1, 1, 0)), "m");
  CHECK(os.str().find("m.averaging = macro_one_vs_rest\n") != std::string::npos);
  CHECK(os.str().find("m.per_class.0.precision = 0.90000000000000002\n") != std::string::npos);
}

// ---------------------------------------------------------------- early stopping

TEST_CASE("early stop boundaries") {
  EarlyStopSpec spec;  // patience 10
  std::vector<double> rising;
  for (int i = 0; i < 50; ++i) {
    rising.push_back(i);
    CHECK(early_stop_check(rising, spec) == StopDecision::Continue);
  }
  std::vector<double> h{1.0};
  for (int i = 0; i < 9; ++i) h.push_back(0.5);
  CHECK(early_stop_check(h, spec) == StopDecision::Continue);
  h.push_back(1.0);  // ties are not improvements
  CHECK(early_stop_check(h, spec) == StopDecision::Stop);
  CHECK(early_stop_check(std::vector<double>{}, spec) == StopDecision::Continue);
}

// ---------------------------------------------------------------- config

TEST_CASE("config parses, rejects unknown keys and round-trips") {
  std::istringstream in(
      "# a run\nseed = 9\nepisodes=40  # short\nhidden = 8, 4\nsource = cases\ncases_csv = x.csv\n"
      "scaler = standard\ndescriptor = hog\n");
  const RunConfig c = parse_run_config(in);
  CHECK(c.seed == 9);
  CHECK(c.episodes == 40);
  CHECK(c.hidden == std::vector<std::size_t>{8, 4});
  CHECK(c.source == CaseSource::Cases);
  CHECK(c.scaler == data::ScalerMode::Standard);
  CHECK(c.descriptor == "HOG");

  std::ostringstream out;
  write_run_config(out, c);
  std::istringstream back(out.str());
  CHECK(same_config(parse_run_config(back), c));

  std::istringstream unknown("seeds = 1\n");
  CHECK_THROWS_AS(parse_run_config(unknown), ConfigError);
  std::istringstream dup("seed = 1\nseed = 2\n");
  CHECK_THROWS_AS(parse_run_config(dup), ConfigError);
  std::istringstream bad("episodes = -3\n");
  CHECK_THROWS_AS(parse_run_config(bad), ConfigError);
  std::istringstream nokv("episodes\n");
  CHECK_THROWS_AS(parse_run_config(nokv), ConfigError);

  CHECK(RunConfig{}.gamma == 0.95);
  CHECK(RunConfig{}.tau == 0.001);
  CHECK(RunConfig{}.noise_sigma == 0.1);
  CHECK(RunConfig{}.patience == 10);
  CHECK(RunConfig{}.validation_fraction == 0.2);
  CHECK(RunConfig{}.test_fraction == 0.2);
}

TEST_CASE("output directory precedence: flag, environment, config") {
  RunConfig c;
  c.out_dir = "from_config";
  ::unsetenv(kOutDirEnv);
  CHECK(resolve_out_dir(std::nullopt, c) == fs::path("from_config"));
  ::setenv(kOutDirEnv, "from_env", 1);
  CHECK(resolve_out_dir(std::nullopt, c) == fs::path("from_env"));
  CHECK(resolve_out_dir(fs::path("from_flag"), c) == fs::path("from_flag"));
  ::unsetenv(kOutDirEnv);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 1);
  CHECK(exit_code_for(ShapeError("x")) == 1);
  CHECK(exit_code_for(DataError("x")) == 2);
  CHECK(exit_code_for(IoError("x")) == 2);
  CHECK(exit_code_for(SchemaError("x")) == 2);
  CHECK(exit_code_for(LoadError("x")) == 2);
  CHECK(exit_code_for(NumericError("x")) == 3);
  CHECK(exit_code_for(StageFailure("train", 3, "nan")) == 3);
}

// ---------------------------------------------------------------- baseline

TEST_CASE("ann baseline separates noise-free synthetic cases") {
  const auto all = env::make_synthetic_cases({300, 16, 4, 0.0, 5});
  const std::vector<env::CaseRecord> train(all.begin(), all.begin() + 180);
  const std::vector<env::CaseRecord> val(all.begin() + 180, all.begin() + 240);
  const std::vector<env::CaseRecord> test(all.begin() + 240, all.end());
  AnnOptions o;
  o.seed = 5;
  const AnnResult r = train_ann(train, val, o);
  const MetricsReport m = compute_metrics(evaluate_scorer(
      [&](std::span<const double> x) { return r.model.scores(x); }, 16, test));
  CHECK(m.accuracy >= 0.99);
  const AnnResult again = train_ann(train, val, o);
  CHECK(again.model.net == r.model.net);
  CHECK_THROWS_AS(train_ann(std::vector<env::CaseRecord>{}, val, o), DataError);
}

// ---------------------------------------------------------------- commands

TEST_CASE("train command writes byte-identical numeric artifacts for equal configs") {
  TempDir dir("train_repro");
  std::ostringstream log;
  const RunConfig c = quick_config();
  const TrainResult a = run_train_command(c, dir.path / "a", log);
  run_train_command(c, dir.path / "b", log);
  for (const char* f : {"config.txt", "checkpoint.txt", "history.csv", "report.txt", "test_cases.csv",
                        "plot_accuracy.csv", "plot_precision.csv", "plot_recall.csv", "plot_f1.csv",
                        "plot_return.csv", "plot_critic_loss.csv"}) {
    CHECK_MESSAGE(slurp(dir.path / "a" / f) == slurp(dir.path / "b" / f), f);
  }
  for (const char* f : {"timing.csv", "episode_wall_ms.csv", "plot_timing.csv", "manifest.txt"}) {
    CHECK_MESSAGE(fs::exists(dir.path / "a" / f), f);
  }
  CHECK(a.outcome.history.episodes.size() == 120);
  CHECK(slurp(dir.path / "a" / "history.csv").rfind("episode,return,critic_loss,actor_objective,eval_accuracy\n", 0) == 0);
}

TEST_CASE("eval on the run's own test split matches the training report") {
  TempDir dir("eval_consistency");
  std::ostringstream log;
  const RunConfig c = quick_config();
  const TrainResult t = run_train_command(c, dir.path / "run", log);
  RunConfig e = c;
  e.checkpoint = dir.path / "run" / "checkpoint.txt";
  e.cases_csv = dir.path / "run" / "test_cases.csv";
  const MetricsReport m = run_eval_command(e, dir.path / "eval", log);
  CHECK(m == t.outcome.test_metrics);
  CHECK(m.accuracy >= 0.0);
  CHECK(m.accuracy <= 1.0);

  std::string ckpt = slurp(e.checkpoint);
  std::ofstream(dir.path / "broken.txt") << ckpt.substr(0, ckpt.size() / 3);
  e.checkpoint = dir.path / "broken.txt";
  try {
    run_eval_command(e, dir.path / "eval2", log);
    FAIL("corrupted checkpoint accepted");
  } catch (const StageFailure& f) {
    CHECK(f.stage() == "load checkpoint");
    CHECK(f.exit_code() == 2);
  }

  RunConfig wide = c;
  wide.n_features = 12;
  wide.seed = 4;
  run_train_command(wide, dir.path / "wide", log);
  e.checkpoint = dir.path / "run" / "checkpoint.txt";
  e.cases_csv = dir.path / "wide" / "test_cases.csv";
  try {
    run_eval_command(e, dir.path / "eval3", log);
    FAIL("dimension mismatch accepted");
  } catch (const StageFailure& f) {
    CHECK(f.exit_code() == 1);
  }
}

TEST_CASE("missing input CSV names the path and exits with a data error") {
  TempDir dir("missing_csv");
  std::ostringstream log;
  RunConfig c = quick_config();
  c.source = CaseSource::Cases;
  c.cases_csv = dir.path / "no_such_cases.csv";
  try {
    run_train_command(c, dir.path / "out", log);
    FAIL("missing file accepted");
  } catch (const StageFailure& f) {
    CHECK(f.exit_code() == 2);
    CHECK(f.stage() == "load data");
    CHECK(std::string(f.what()).find("no_such_cases.csv") != std::string::npos);
  }
}

TEST_CASE("zero episodes still produce valid artifacts") {
  TempDir dir("zero_episodes");
  std::ostringstream log;
  RunConfig c = quick_config();
  c.episodes = 0;
  const TrainResult r = run_train_command(c, dir.path, log);
  CHECK(r.outcome.history.episodes.empty());
  CHECK(slurp(dir.path / "history.csv") == "episode,return,critic_loss,actor_objective,eval_accuracy\n");
  CHECK(rl::DdpgAgent::load((dir.path / "checkpoint.txt").string()).env_steps() == 0);
}

TEST_CASE("table source runs through scaling, one-hot and splitting") {
  TempDir dir("table_source");
  std::ostringstream log;
  {
    std::ofstream schema(dir.path / "schema.txt");
    schema << "id = identifier\nx = numeric\ncolour = categorical\nlabel = label\n";
    std::ofstream csv(dir.path / "cases.csv");
    csv << "id,x,colour,label\n";
    const char* colours[] = {"red", "green", "blue"};
    for (int i = 0; i < 60; ++i) csv << "c" << i << ',' << (i % 3) * 10 + 1 << ',' << colours[i % 3] << ',' << i % 3 << '\n';
    csv << "bad,abc,red,0\n";
  }
  RunConfig c = quick_config();
  c.source = CaseSource::Table;
  c.table_csv = dir.path / "cases.csv";
  c.schema = dir.path / "schema.txt";
  c.n_suspects = 3;
  const PreparedCases p = prepare_cases(c);
  CHECK(p.dropped_rows == 1);
  CHECK(p.train.size() == 36);
  CHECK(p.validation.size() == 12);
  CHECK(p.test.size() == 12);
  CHECK(p.train.front().features.size() == 4);  // x plus three colour indicators
  const TrainResult r = run_train_command(c, dir.path / "out", log);
  CHECK(slurp(dir.path / "out" / "report.txt").find("dropped_rows = 1\n") != std::string::npos);
  CHECK(r.outcome.test_metrics.n_cases == 12);
}

TEST_CASE("extract-features: LBP rows, empty directory, corrupt files") {
  TempDir dir("extract");
  std::ostringstream log;
  fs::create_directories(dir.path / "imgs");
  fs::create_directories(dir.path / "empty");
  for (int i = 0; i < 3; ++i) write_gradient_pgm(dir.path / "imgs" / ("img" + std::to_string(i) + ".pgm"), 16, 16, i);
  std::ofstream(dir.path / "imgs" / "broken.pgm") << "P5\n16 16\n255\nshort";
  std::ofstream(dir.path / "imgs" / "junk.pgm") << "not an image";
  std::ofstream(dir.path / "imgs" / "notes.txt") << "ignored";

  RunConfig c;
  c.image_dir = dir.path / "imgs";
  const ExtractResult r = run_extract_command(c, dir.path / "lbp", log);
  CHECK(r.rows == 3);
  CHECK(r.feature_width == 256);
  CHECK(r.skipped == std::vector<std::string>{"broken.pgm", "junk.pgm"});
  std::istringstream csv(slurp(r.features_csv));
  const auto recs = data::parse_csv(csv);
  REQUIRE(recs.size() == 4);
  CHECK(recs[0].size() == 257);
  CHECK(recs[1][0] == "img0.pgm");
  CHECK(recs[3][0] == "img2.pgm");
  CHECK(slurp(dir.path / "lbp" / "extract_summary.txt").find("skipped = 2\n") != std::string::npos);

  c.descriptor = "HOG";
  const ExtractResult h = run_extract_command(c, dir.path / "hog", log);
  CHECK(h.rows == 3);
  CHECK(h.feature_width == 2 * 2 * 9);

  set_run_config_value(c, "descriptor", "concat");
  const ExtractResult both = run_extract_command(c, dir.path / "concat", log);
  CHECK(both.feature_width == 256 + 2 * 2 * 9);
  std::istringstream lbp_csv(slurp(r.features_csv)), hog_csv(slurp(h.features_csv)),
      both_csv(slurp(both.features_csv));
  const auto lr = data::parse_csv(lbp_csv), hr = data::parse_csv(hog_csv), br = data::parse_csv(both_csv);
  REQUIRE(br.size() == 4);
  for (std::size_t row = 1; row < 4; ++row) {
    std::vector<std::string> joined = lr[row];
    joined.insert(joined.end(), hr[row].begin() + 1, hr[row].end());
    CHECK(br[row] == joined);
  }
  CHECK_THROWS_AS(set_run_config_value(c, "descriptor", "SIFT"), ConfigError);

  c.descriptor = "LBP";
  c.image_dir = dir.path / "empty";
  const ExtractResult e = run_extract_command(c, dir.path / "none", log);
  CHECK(e.rows == 0);
  std::istringstream header(slurp(e.features_csv));
  const auto only = data::parse_csv(header);
  REQUIRE(only.size() == 1);
  CHECK(only[0].size() == 257);

  c.image_dir = dir.path / "missing";
  CHECK_THROWS_AS(run_extract_command(c, dir.path / "x", log), StageFailure);
}

TEST_CASE("synth-bench emits exactly two method entries and is reproducible") {
  TempDir dir("bench");
  std::ostringstream log;
  RunConfig c = quick_config();
  c.ann_epochs = 30;
  const BenchResult a = run_synth_bench_command(c, dir.path / "a", log);
  run_synth_bench_command(c, dir.path / "b", log);
  const std::string report = slurp(dir.path / "a" / "bench_report.txt");
  CHECK(report.rfind("methods = ddpg,ann_baseline\n", 0) == 0);
  CHECK(report.find("ddpg.accuracy = ") != std::string::npos);
  CHECK(report.find("ann_baseline.accuracy = ") != std::string::npos);
  for (const char* f : {"bench_report.txt", "report_ddpg.txt", "report_ann_baseline.txt", "checkpoint.txt",
                        "ann_model.txt", "plot_ddpg_accuracy.csv", "plot_ann_accuracy.csv"}) {
    CHECK_MESSAGE(slurp(dir.path / "a" / f) == slurp(dir.path / "b" / f), f);
  }
  CHECK(fs::exists(dir.path / "a" / "bench_timing.csv"));
  CHECK(a.ddpg.n_cases == a.ann_baseline.n_cases);
}
