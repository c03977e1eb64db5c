#include "culprit/data/table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "culprit/detail/shuffle.hpp"
#include "culprit/errors.hpp"
#include "culprit/nn/serialize.hpp"

namespace culprit::data {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::optional<double> parse_real(std::string_view text) {
  const std::string t = trim(text);
  if (t.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const double v = std::stod(t, &pos);
    if (pos != t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

bool is_real_kind(ColumnKind k) { return k == ColumnKind::Numeric || k == ColumnKind::Label; }

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return is;
}

double as_real(const Cell& c) { return std::get<double>(c); }

RawTable with_rows(const RawTable& t, const std::vector<std::size_t>& idx) {
  RawTable out{t.schema, {}, 0};
  out.rows.reserve(idx.size());
  for (std::size_t i : idx) out.rows.push_back(t.rows[i]);
  return out;
}

}  // namespace

std::string_view to_string(ColumnKind kind) noexcept {
  switch (kind) {
    case ColumnKind::Numeric: return "numeric";
    case ColumnKind::Categorical: return "categorical";
    case ColumnKind::Identifier: return "identifier";
    case ColumnKind::Label: return "label";
  }
  return "numeric";
}

ColumnKind parse_column_kind(std::string_view text) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "numeric") return ColumnKind::Numeric;
  if (t == "categorical") return ColumnKind::Categorical;
  if (t == "identifier") return ColumnKind::Identifier;
  if (t == "label") return ColumnKind::Label;
  throw SchemaError(fmt::format("unknown column kind '{}'", text));
}

std::optional<std::size_t> RawTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::vector<std::string>> parse_csv(std::istream& is) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool line_has_content = false;
  char c;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    if (line_has_content) {
      end_field();
      records.push_back(std::move(record));
    }
    record.clear();
    field.clear();
    line_has_content = false;
    field_started = false;
  };
  while (is.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (is.peek() == '"') {
          is.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started || trim(field).empty()) {
          field.clear();
          in_quotes = true;
          field_started = true;
          line_has_content = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        line_has_content = true;
        end_field();
        break;
      case '\r':
        if (is.peek() == '\n') is.get(c);
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
        line_has_content = true;
    }
  }
  if (in_quotes) throw DataError("csv: unterminated quoted field");
  end_record();
  return records;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

RawTable load_csv(const std::filesystem::path& path, const Schema& schema) {
  auto is = open_input(path);
  auto records = parse_csv(is);
  if (records.empty()) throw SchemaError(fmt::format("{}: missing header row", path.string()));
  const auto& header = records.front();
  bool header_ok = header.size() == schema.size();
  for (std::size_t i = 0; header_ok && i < header.size(); ++i) {
    header_ok = trim(header[i]) == schema[i].name;
  }
  if (!header_ok) {
    std::string expected;
    for (const auto& c : schema) expected += (expected.empty() ? "" : ",") + c.name;
    throw SchemaError(fmt::format("{}: header does not match schema (expected {})", path.string(),
                                  expected));
  }
  RawTable table{schema, {}, 0};
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != schema.size()) {
      ++table.dropped_rows;
      continue;
    }
    Row row;
    row.reserve(schema.size());
    bool ok = true;
    for (std::size_t i = 0; i < schema.size() && ok; ++i) {
      if (is_real_kind(schema[i].kind)) {
        const auto v = parse_real(rec[i]);
        if (!v) {
          ok = false;
        } else {
          row.emplace_back(*v);
        }
      } else {
        row.emplace_back(trim(rec[i]));
      }
    }
    if (ok) {
      table.rows.push_back(std::move(row));
    } else {
      ++table.dropped_rows;
    }
  }
  return table;
}

Schema load_schema(const std::filesystem::path& path) {
  auto is = open_input(path);
  Schema schema;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw SchemaError(fmt::format("{}:{}: expected 'name = kind'", path.string(), line_no));
    }
    ColumnSchema col{trim(body.substr(0, eq)), parse_column_kind(body.substr(eq + 1))};
    if (col.name.empty()) throw SchemaError(fmt::format("{}:{}: empty column name", path.string(), line_no));
    for (const auto& c : schema) {
      if (c.name == col.name) {
        throw SchemaError(fmt::format("{}:{}: duplicate column '{}'", path.string(), line_no, col.name));
      }
    }
    schema.push_back(std::move(col));
  }
  if (schema.empty()) throw SchemaError(fmt::format("{}: schema lists no columns", path.string()));
  return schema;
}

void write_csv(const std::filesystem::path& path, const RawTable& table) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  for (std::size_t i = 0; i < table.schema.size(); ++i) {
    os << (i ? "," : "") << csv_escape(table.schema[i].name);
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      if (const double* v = std::get_if<double>(&row[i])) {
        os << nn::format_real(*v);
      } else {
        os << csv_escape(std::get<std::string>(row[i]));
      }
    }
    os << '\n';
  }
}

ScalerStats fit_scaler(const RawTable& table, ScalerMode mode) {
  if (table.rows.empty()) throw DataError("fit_scaler: table has no rows");
  ScalerStats stats{mode, {}};
  const double n = static_cast<double>(table.rows.size());
  for (std::size_t c = 0; c < table.schema.size(); ++c) {
    if (table.schema[c].kind != ColumnKind::Numeric) continue;
    ColumnStats s{table.schema[c].name, as_real(table.rows[0][c]), as_real(table.rows[0][c]), 0.0, 0.0};
    double sum = 0.0;
    for (const auto& row : table.rows) {
      const double v = as_real(row[c]);
      s.min = std::min(s.min, v);
      s.max = std::max(s.max, v);
      sum += v;
    }
    s.mean = sum / n;
    double sq = 0.0;
    for (const auto& row : table.rows) {
      const double d = as_real(row[c]) - s.mean;
      sq += d * d;
    }
    s.std = std::sqrt(sq / n);
    stats.columns.push_back(std::move(s));
  }
  return stats;
}

RawTable apply_scaler(const RawTable& table, const ScalerStats& stats) {
  RawTable out = table;
  for (std::size_t c = 0; c < table.schema.size(); ++c) {
    if (table.schema[c].kind != ColumnKind::Numeric) continue;
    const auto it = std::find_if(stats.columns.begin(), stats.columns.end(),
                                 [&](const ColumnStats& s) { return s.column == table.schema[c].name; });
    if (it == stats.columns.end()) {
      throw SchemaError(fmt::format("apply_scaler: no statistics for column '{}'", table.schema[c].name));
    }
    for (auto& row : out.rows) {
      double& v = std::get<double>(row[c]);
      if (stats.mode == ScalerMode::MinMax) {
        const double range = it->max - it->min;
        v = range > 0.0 ? (v - it->min) / range : 0.0;
      } else {
        v = it->std > 0.0 ? (v - it->mean) / it->std : 0.0;
      }
    }
  }
  return out;
}

OneHotVocabulary fit_one_hot(const RawTable& train) {
  OneHotVocabulary vocab;
  for (std::size_t c = 0; c < train.schema.size(); ++c) {
    if (train.schema[c].kind != ColumnKind::Categorical) continue;
    OneHotVocabulary::Column col{train.schema[c].name, {}};
    for (const auto& row : train.rows) {
      const auto& value = std::get<std::string>(row[c]);
      if (std::find(col.categories.begin(), col.categories.end(), value) == col.categories.end()) {
        col.categories.push_back(value);
      }
    }
    vocab.columns.push_back(std::move(col));
  }
  return vocab;
}

RawTable apply_one_hot(const RawTable& table, const OneHotVocabulary& vocabulary) {
  RawTable out;
  out.dropped_rows = table.dropped_rows;
  std::vector<const OneHotVocabulary::Column*> expand(table.schema.size(), nullptr);
  for (std::size_t c = 0; c < table.schema.size(); ++c) {
    if (table.schema[c].kind != ColumnKind::Categorical) {
      out.schema.push_back(table.schema[c]);
      continue;
    }
    const auto it = std::find_if(vocabulary.columns.begin(), vocabulary.columns.end(),
                                 [&](const auto& v) { return v.name == table.schema[c].name; });
    if (it == vocabulary.columns.end()) {
      throw SchemaError(fmt::format("one_hot: no vocabulary for column '{}'", table.schema[c].name));
    }
    expand[c] = &*it;
    for (const auto& cat : it->categories) {
      out.schema.push_back({it->name + "=" + cat, ColumnKind::Numeric});
    }
  }
  out.rows.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    Row r;
    r.reserve(out.schema.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!expand[c]) {
        r.push_back(row[c]);
        continue;
      }
      const auto& value = std::get<std::string>(row[c]);
      for (const auto& cat : expand[c]->categories) r.emplace_back(cat == value ? 1.0 : 0.0);
    }
    out.rows.push_back(std::move(r));
  }
  return out;
}

void SplitSpec::validate() const {
  if (!(validation_fraction >= 0.0) || !(test_fraction >= 0.0) ||
      !(validation_fraction + test_fraction < 1.0)) {
    throw ConfigError(fmt::format("split fractions {} / {} must be >= 0 and sum below 1",
                                  validation_fraction, test_fraction));
  }
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  if (n == 0) throw DataError("split: no rows");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(spec.seed);
  detail::shuffle(order, rng);
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.test_fraction));
  const auto n_val =
      static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.validation_fraction));
  const std::size_t n_train = n - n_test - n_val;
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + n_train);
  out.validation.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  out.test.assign(order.begin() + n_train + n_val, order.end());
  return out;
}

Splits split(const RawTable& table, const SplitSpec& spec) {
  const SplitIndices idx = split_indices(table.rows.size(), spec);
  return {with_rows(table, idx.train), with_rows(table, idx.validation), with_rows(table, idx.test)};
}

std::vector<env::CaseRecord> to_case_records(const RawTable& table, std::string_view label_column,
                                             std::size_t n_suspects) {
  const auto label = table.column_index(label_column);
  if (!label) throw SchemaError(fmt::format("to_case_records: no column '{}'", label_column));
  if (table.schema[*label].kind != ColumnKind::Label && table.schema[*label].kind != ColumnKind::Numeric) {
    throw SchemaError(fmt::format("to_case_records: column '{}' is not a label", label_column));
  }
  std::optional<std::size_t> id_col;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < table.schema.size(); ++c) {
    if (c == *label) continue;
    switch (table.schema[c].kind) {
      case ColumnKind::Identifier:
        if (!id_col) id_col = c;
        break;
      case ColumnKind::Categorical:
        throw DataError(fmt::format("to_case_records: column '{}' is still categorical; one-hot encode it first",
                                    table.schema[c].name));
      case ColumnKind::Label:
        throw SchemaError("to_case_records: more than one label column");
      case ColumnKind::Numeric:
        feature_cols.push_back(c);
        break;
    }
  }
  std::vector<env::CaseRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const double lv = as_real(row[*label]);
    if (lv < 0.0 || lv >= static_cast<double>(n_suspects) || lv != std::floor(lv)) {
      throw DataError(fmt::format("row {}: label {} is not an integer in [0, {})", r,
                                  nn::format_real(lv), n_suspects));
    }
    env::CaseRecord rec;
    rec.case_id = id_col ? std::get<std::string>(row[*id_col]) : std::to_string(r);
    rec.n_suspects = n_suspects;
    rec.culprit_index = static_cast<std::size_t>(lv);
    rec.features.kind = vision::DescriptorKind::Tabular;
    rec.features.values.reserve(feature_cols.size());
    for (std::size_t c : feature_cols) rec.features.values.push_back(as_real(row[c]));
    records.push_back(std::move(rec));
  }
  return records;
}

CaseFile load_cases_csv(const std::filesystem::path& path) {
  Schema schema;
  {
    auto is = open_input(path);
    std::string header_line;
    std::getline(is, header_line);
    std::istringstream hs(header_line);
    const auto header = parse_csv(hs);
    if (header.empty() || header.front().size() < 4 || trim(header.front()[0]) != "case_id" ||
        trim(header.front()[1]) != "culprit_index" || trim(header.front()[2]) != "n_suspects") {
      throw SchemaError(fmt::format("{}: case file header must start with case_id,culprit_index,n_suspects "
                                    "followed by at least one feature column",
                                    path.string()));
    }
    schema = {{"case_id", ColumnKind::Identifier},
              {"culprit_index", ColumnKind::Label},
              {"n_suspects", ColumnKind::Numeric}};
    for (std::size_t i = 3; i < header.front().size(); ++i) {
      schema.push_back({trim(header.front()[i]), ColumnKind::Numeric});
    }
  }
  const RawTable table = load_csv(path, schema);
  CaseFile file;
  file.dropped_rows = table.dropped_rows;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const double ns = as_real(row[2]);
    const double ci = as_real(row[1]);
    if (ns < 2.0 || ns != std::floor(ns) || ci < 0.0 || ci >= ns || ci != std::floor(ci)) {
      throw DataError(fmt::format("{}: row {} has culprit_index {} / n_suspects {}", path.string(),
                                  r + 1, nn::format_real(ci), nn::format_real(ns)));
    }
    env::CaseRecord rec;
    rec.case_id = std::get<std::string>(row[0]);
    rec.culprit_index = static_cast<std::size_t>(ci);
    rec.n_suspects = static_cast<std::size_t>(ns);
    rec.features.kind = vision::DescriptorKind::Tabular;
    for (std::size_t c = 3; c < row.size(); ++c) rec.features.values.push_back(as_real(row[c]));
    file.records.push_back(std::move(rec));
  }
  return file;
}

void write_cases_csv(const std::filesystem::path& path, const std::vector<env::CaseRecord>& cases) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  const std::size_t width = cases.empty() ? 0 : cases.front().features.size();
  os << "case_id,culprit_index,n_suspects";
  for (std::size_t i = 0; i < width; ++i) os << ",f" << i;
  os << '\n';
  for (const auto& c : cases) {
    if (c.features.size() != width) throw ShapeError("write_cases_csv: ragged feature widths");
    os << csv_escape(c.case_id) << ',' << c.culprit_index << ',' << c.n_suspects;
    for (double v : c.features.values) os << ',' << nn::format_real(v);
    os << '\n';
  }
}

}  // namespace culprit::data
