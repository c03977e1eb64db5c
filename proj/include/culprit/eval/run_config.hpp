#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "culprit/data/table.hpp"
#include "culprit/rl/ddpg_agent.hpp"

namespace culprit::eval {

enum class CaseSource { Synthetic, Cases, Table };

/// Everything a run depends on besides its input files. Serialized as flat
/// `key = value` lines; `#` starts a comment; unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;

  // case source
  CaseSource source = CaseSource::Synthetic;
  std::size_t n_cases = 500;
  std::size_t n_features = 16;
  std::size_t n_suspects = 4;
  double noise = 0.1;
  std::filesystem::path cases_csv;   // source = cases, and the eval verb
  std::filesystem::path table_csv;   // source = table
  std::filesystem::path schema;      // source = table
  std::string label_column = "label";
  std::optional<data::ScalerMode> scaler = data::ScalerMode::MinMax;  // table only; nullopt = none

  double validation_fraction = 0.2;
  double test_fraction = 0.2;

  // training
  std::size_t episodes = 3000;
  std::size_t max_steps = 1;
  std::size_t eval_every = 100;
  std::size_t patience = 10;
  double gamma = 0.95;
  double tau = 0.001;
  double noise_sigma = 0.1;
  std::size_t batch_size = 64;
  std::size_t buffer_capacity = 100'000;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  std::vector<std::size_t> hidden = {64, 64};
  double head_init_scale = 3e-3;

  // supervised baseline (synth-bench)
  std::size_t ann_epochs = 200;
  std::size_t ann_batch_size = 32;
  double ann_lr = 1e-3;

  // feature extraction
  std::filesystem::path image_dir;
  std::string descriptor = "LBP";
  std::size_t hog_cell_size = 8;

  // evaluation
  std::filesystem::path checkpoint;

  std::filesystem::path out_dir = "culprit_out";

  /// Agent hyperparameters for the given problem size.
  rl::AgentConfig agent_config(std::size_t state_dim, std::size_t action_dim) const;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

/// Reads `key = value` lines over the defaults. Throws ConfigError naming
/// the line for unknown keys, malformed values or duplicates.
RunConfig parse_run_config(std::istream& is, const std::string& origin = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies one `key = value` assignment; used for overrides as well.
void set_run_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Every key, in a fixed order, so the output parses back to an equal config.
void write_run_config(std::ostream& os, const RunConfig& config);

bool same_config(const RunConfig& a, const RunConfig& b);

/// Name of the environment variable that overrides the output directory.
inline constexpr const char* kOutDirEnv = "CULPRIT_OUT_DIR";

/// Precedence: explicit command-line value, then the environment variable,
/// then the config file.
std::filesystem::path resolve_out_dir(const std::optional<std::filesystem::path>& cli,
                                      const RunConfig& config);

}  // namespace culprit::eval
