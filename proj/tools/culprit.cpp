// culprit: train, evaluate and benchmark the case-identification agent.
//
//   culprit train        --config run.cfg [--seed N] [--episodes N] [--out DIR]
//   culprit eval         --config run.cfg --checkpoint DIR/checkpoint.txt --cases DIR/test_cases.csv
//   culprit extract-features --images DIR [--descriptor LBP|HOG|CONCAT]
//   culprit synth-bench  --config bench.cfg
//
// Every verb accepts `--set key=value` (repeatable) for any config key.
// The output directory is --out, else $CULPRIT_OUT_DIR, else out_dir from
// the config. Exit status: 0 ok, 1 usage/config, 2 data, 3 numeric.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "culprit/errors.hpp"
#include "culprit/eval/commands.hpp"
#include "culprit/eval/run_config.hpp"

namespace fs = std::filesystem;
using namespace culprit;

namespace {

struct CommonArgs {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> episodes;
  std::optional<fs::path> out;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "flat key = value run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "override the config seed");
  cmd->add_option("--episodes", a.episodes, "override the episode budget");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_option("--set", a.sets, "override any config key, as key=value")->take_all();
}

eval::RunConfig build_config(const CommonArgs& a) {
  eval::RunConfig c = a.config ? eval::load_run_config(*a.config) : eval::RunConfig{};
  for (const std::string& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    eval::set_run_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed) c.seed = *a.seed;
  if (a.episodes) c.episodes = *a.episodes;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Culprit identification with a DDPG agent"};
  app.require_subcommand(1);

  CommonArgs train_args, eval_args, extract_args, bench_args;
  std::optional<fs::path> checkpoint, cases, images;
  std::optional<std::string> descriptor;

  CLI::App* train = app.add_subcommand("train", "train an agent and write run artifacts");
  add_common(train, train_args);

  CLI::App* evaluate = app.add_subcommand("eval", "score a checkpoint on a case file");
  add_common(evaluate, eval_args);
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint written by train");
  evaluate->add_option("--cases", cases, "case CSV (case_id,culprit_index,n_suspects,f0,...)");

  CLI::App* extract = app.add_subcommand("extract-features", "LBP, HOG or concatenated features for a PGM directory");
  add_common(extract, extract_args);
  extract->add_option("--images", images, "directory of binary PGM images");
  extract->add_option("--descriptor", descriptor, "LBP, HOG or CONCAT (LBP then HOG)");

  CLI::App* bench = app.add_subcommand("synth-bench", "DDPG against the supervised MLP baseline");
  add_common(bench, bench_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const char* verb = app.get_subcommands().front()->get_name().c_str();
  try {
    if (train->parsed()) {
      const eval::RunConfig c = build_config(train_args);
      eval::run_train_command(c, eval::resolve_out_dir(train_args.out, c), std::cout);
    } else if (evaluate->parsed()) {
      eval::RunConfig c = build_config(eval_args);
      if (checkpoint) c.checkpoint = *checkpoint;
      if (cases) c.cases_csv = *cases;
      eval::run_eval_command(c, eval::resolve_out_dir(eval_args.out, c), std::cout);
    } else if (extract->parsed()) {
      eval::RunConfig c = build_config(extract_args);
      if (images) c.image_dir = *images;
      if (descriptor) eval::set_run_config_value(c, "descriptor", *descriptor);
      eval::run_extract_command(c, eval::resolve_out_dir(extract_args.out, c), std::cout);
    } else if (bench->parsed()) {
      const eval::RunConfig c = build_config(bench_args);
      eval::run_synth_bench_command(c, eval::resolve_out_dir(bench_args.out, c), std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "culprit " << verb << ": " << e.what() << '\n';
    return eval::exit_code_for(e);
  }
  return 0;
}
