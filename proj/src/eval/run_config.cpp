#include "culprit/eval/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "culprit/errors.hpp"
#include "culprit/nn/serialize.hpp"

namespace culprit::eval {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

template <typename T>
T parse_unsigned(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(fmt::format("'{}' expects a non-negative integer, got '{}'", key, v));
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("'{}' expects a finite number, got '{}'", key, v));
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const std::string item = trim(v.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!item.empty()) out.push_back(parse_unsigned<std::size_t>(key, item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string show(double v) { return nn::format_real(v); }
std::string show(std::size_t v) { return std::to_string(v); }

#define CULPRIT_SIZE_FIELD(name)                                                      \
  Field {                                                                              \
    #name, [](RunConfig& c, const std::string& v) { c.name = parse_unsigned<std::size_t>(#name, v); }, \
        [](const RunConfig& c) { return show(c.name); }                                \
  }
#define CULPRIT_REAL_FIELD(name)                                                                 \
  Field {                                                                                         \
    #name, [](RunConfig& c, const std::string& v) { c.name = parse_double(#name, v); },           \
        [](const RunConfig& c) { return show(c.name); }                                           \
  }
#define CULPRIT_PATH_FIELD(name)                                                                  \
  Field {                                                                                          \
    #name, [](RunConfig& c, const std::string& v) { c.name = v; },                                 \
        [](const RunConfig& c) { return c.name.string(); }                                         \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_unsigned<std::uint64_t>("seed", v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"source",
       [](RunConfig& c, const std::string& v) {
         const std::string s = lower(v);
         if (s == "synthetic") {
           c.source = CaseSource::Synthetic;
         } else if (s == "cases") {
           c.source = CaseSource::Cases;
         } else if (s == "table") {
           c.source = CaseSource::Table;
         } else {
           throw ConfigError(fmt::format("'source' must be synthetic, cases or table, got '{}'", v));
         }
       },
       [](const RunConfig& c) -> std::string {
         switch (c.source) {
           case CaseSource::Synthetic: return "synthetic";
           case CaseSource::Cases: return "cases";
           case CaseSource::Table: return "table";
         }
         return "synthetic";
       }},
      CULPRIT_SIZE_FIELD(n_cases),
      CULPRIT_SIZE_FIELD(n_features),
      CULPRIT_SIZE_FIELD(n_suspects),
      CULPRIT_REAL_FIELD(noise),
      CULPRIT_PATH_FIELD(cases_csv),
      CULPRIT_PATH_FIELD(table_csv),
      CULPRIT_PATH_FIELD(schema),
      {"label_column", [](RunConfig& c, const std::string& v) { c.label_column = v; },
       [](const RunConfig& c) { return c.label_column; }},
      {"scaler",
       [](RunConfig& c, const std::string& v) {
         const std::string s = lower(v);
         if (s == "minmax") {
           c.scaler = data::ScalerMode::MinMax;
         } else if (s == "standard") {
           c.scaler = data::ScalerMode::Standard;
         } else if (s == "none") {
           c.scaler.reset();
         } else {
           throw ConfigError(fmt::format("'scaler' must be minmax, standard or none, got '{}'", v));
         }
       },
       [](const RunConfig& c) -> std::string {
         if (!c.scaler) return "none";
         return *c.scaler == data::ScalerMode::MinMax ? "minmax" : "standard";
       }},
      CULPRIT_REAL_FIELD(validation_fraction),
      CULPRIT_REAL_FIELD(test_fraction),
      CULPRIT_SIZE_FIELD(episodes),
      CULPRIT_SIZE_FIELD(max_steps),
      CULPRIT_SIZE_FIELD(eval_every),
      CULPRIT_SIZE_FIELD(patience),
      CULPRIT_REAL_FIELD(gamma),
      CULPRIT_REAL_FIELD(tau),
      CULPRIT_REAL_FIELD(noise_sigma),
      CULPRIT_SIZE_FIELD(batch_size),
      CULPRIT_SIZE_FIELD(buffer_capacity),
      CULPRIT_REAL_FIELD(actor_lr),
      CULPRIT_REAL_FIELD(critic_lr),
      {"hidden", [](RunConfig& c, const std::string& v) { c.hidden = parse_list("hidden", v); },
       [](const RunConfig& c) {
         std::string s;
         for (std::size_t h : c.hidden) s += (s.empty() ? "" : ",") + std::to_string(h);
         return s;
       }},
      CULPRIT_REAL_FIELD(head_init_scale),
      CULPRIT_SIZE_FIELD(ann_epochs),
      CULPRIT_SIZE_FIELD(ann_batch_size),
      CULPRIT_REAL_FIELD(ann_lr),
      CULPRIT_PATH_FIELD(image_dir),
      {"descriptor",
       [](RunConfig& c, const std::string& v) {
         std::string s = v;
         std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::toupper(ch); });
         if (s != "LBP" && s != "HOG" && s != "CONCAT") {
           throw ConfigError(fmt::format("'descriptor' must be LBP, HOG or CONCAT, got '{}'", v));
         }
         c.descriptor = s;
       },
       [](const RunConfig& c) { return c.descriptor; }},
      CULPRIT_SIZE_FIELD(hog_cell_size),
      CULPRIT_PATH_FIELD(checkpoint),
      CULPRIT_PATH_FIELD(out_dir),
  };
  return table;
}

#undef CULPRIT_SIZE_FIELD
#undef CULPRIT_REAL_FIELD
#undef CULPRIT_PATH_FIELD

}  // namespace

rl::AgentConfig RunConfig::agent_config(std::size_t state_dim, std::size_t action_dim) const {
  rl::AgentConfig a;
  a.state_dim = state_dim;
  a.action_dim = action_dim;
  a.gamma = gamma;
  a.tau = tau;
  a.noise_sigma = noise_sigma;
  a.batch_size = batch_size;
  a.buffer_capacity = buffer_capacity;
  a.actor_lr = actor_lr;
  a.critic_lr = critic_lr;
  a.hidden = hidden;
  a.head_init_scale = head_init_scale;
  a.seed = seed;
  return a;
}

void RunConfig::validate() const {
  data::SplitSpec{validation_fraction, test_fraction, seed}.validate();
  agent_config(1, 2).validate();
  if (max_steps == 0) throw ConfigError("max_steps must be positive");
  if (patience == 0) throw ConfigError("patience must be positive");
  if (hog_cell_size == 0) throw ConfigError("hog_cell_size must be positive");
  if (ann_batch_size == 0 || !(ann_lr > 0.0)) throw ConfigError("ann_batch_size and ann_lr must be positive");
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
  if (source == CaseSource::Synthetic) {
    if (n_suspects < 2) throw ConfigError("n_suspects must be at least 2");
    if (n_features < n_suspects) throw ConfigError("n_features must be at least n_suspects");
    if (n_cases == 0) throw ConfigError("n_cases must be positive");
    if (noise < 0.0) throw ConfigError("noise must be >= 0");
  }
  if (source == CaseSource::Cases && cases_csv.empty()) throw ConfigError("source = cases needs cases_csv");
  if (source == CaseSource::Table && (table_csv.empty() || schema.empty())) {
    throw ConfigError("source = table needs table_csv and schema");
  }
  if (source == CaseSource::Table && n_suspects < 2) throw ConfigError("n_suspects must be at least 2");
}

void set_run_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  for (const Field& f : fields()) {
    if (key == f.key) {
      f.set(config, value);
      return;
    }
  }
  throw ConfigError(fmt::format("unknown config key '{}'", key));
}

RunConfig parse_run_config(std::istream& is, const std::string& origin) {
  RunConfig config;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, line_no));
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", origin, line_no, key));
    try {
      set_run_config_value(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", origin, line_no, e.what()));
    }
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  return parse_run_config(is, path.string());
}

void write_run_config(std::ostream& os, const RunConfig& config) {
  for (const Field& f : fields()) os << f.key << " = " << f.get(config) << '\n';
}

bool same_config(const RunConfig& a, const RunConfig& b) {
  for (const Field& f : fields()) {
    if (f.get(a) != f.get(b)) return false;
  }
  return true;
}

std::filesystem::path resolve_out_dir(const std::optional<std::filesystem::path>& cli,
                                      const RunConfig& config) {
  if (cli && !cli->empty()) return *cli;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return config.out_dir;
}

}  // namespace culprit::eval
