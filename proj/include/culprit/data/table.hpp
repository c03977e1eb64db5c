#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "culprit/env/environment.hpp"

namespace culprit::data {

enum class ColumnKind { Numeric, Categorical, Identifier, Label };

std::string_view to_string(ColumnKind kind) noexcept;
ColumnKind parse_column_kind(std::string_view text);

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;

  friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

using Schema = std::vector<ColumnSchema>;

/// Numeric and label cells hold doubles; categorical and identifier cells
/// hold text.
using Cell = std::variant<double, std::string>;
using Row = std::vector<Cell>;

struct RawTable {
  Schema schema;
  std::vector<Row> rows;
  std::size_t dropped_rows = 0;  // malformed rows removed while loading

  std::optional<std::size_t> column_index(std::string_view name) const;
  std::size_t size() const noexcept { return rows.size(); }
};

/// RFC-4180 records: quoted fields, doubled quotes, CRLF or LF endings.
std::vector<std::vector<std::string>> parse_csv(std::istream& is);
std::string csv_escape(std::string_view field);

/// Header must list exactly the schema's names in order. Rows whose numeric
/// or label cells do not parse as finite reals are dropped and counted.
RawTable load_csv(const std::filesystem::path& path, const Schema& schema);

/// Sidecar file of `name = kind` lines (`#` comments), in column order.
Schema load_schema(const std::filesystem::path& path);

void write_csv(const std::filesystem::path& path, const RawTable& table);

enum class ScalerMode { MinMax, Standard };

struct ColumnStats {
  std::string column;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation

  friend bool operator==(const ColumnStats&, const ColumnStats&) = default;
};

struct ScalerStats {
  ScalerMode mode = ScalerMode::MinMax;
  std::vector<ColumnStats> columns;  // one per NUMERIC column

  friend bool operator==(const ScalerStats&, const ScalerStats&) = default;
};

/// Fit on training rows only.
ScalerStats fit_scaler(const RawTable& table, ScalerMode mode);

/// MinMax: (x - min) / (max - min), constant column -> 0. Standard:
/// (x - mean) / std, std == 0 -> 0. No clipping.
RawTable apply_scaler(const RawTable& table, const ScalerStats& stats);

struct OneHotVocabulary {
  struct Column {
    std::string name;
    std::vector<std::string> categories;  // first-appearance order

    friend bool operator==(const Column&, const Column&) = default;
  };
  std::vector<Column> columns;

  friend bool operator==(const OneHotVocabulary&, const OneHotVocabulary&) = default;
};

OneHotVocabulary fit_one_hot(const RawTable& train);

/// Each CATEGORICAL column becomes one NUMERIC indicator column per
/// category, named `column=category`. Unseen categories encode as zeros.
RawTable apply_one_hot(const RawTable& table, const OneHotVocabulary& vocabulary);

struct SplitSpec {
  double validation_fraction = 0.2;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Splits {
  RawTable train;
  RawTable validation;
  RawTable test;
};

/// Seeded shuffle, then test = last floor(n * test_fraction) rows,
/// validation = the floor(n * validation_fraction) rows before those,
/// train = the rest.
Splits split(const RawTable& table, const SplitSpec& spec);

/// Same slicing rule over any sequence, returning row indices.
struct SplitIndices {
  std::vector<std::size_t> train, validation, test;
};
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);

/// One record per row; features are every non-IDENTIFIER, non-label column
/// in column order. The first IDENTIFIER column, if any, names the case.
std::vector<env::CaseRecord> to_case_records(const RawTable& table, std::string_view label_column,
                                             std::size_t n_suspects);

/// Case file: header `case_id,culprit_index,n_suspects,f0,f1,...`.
struct CaseFile {
  std::vector<env::CaseRecord> records;
  std::size_t dropped_rows = 0;
};

CaseFile load_cases_csv(const std::filesystem::path& path);
void write_cases_csv(const std::filesystem::path& path, const std::vector<env::CaseRecord>& cases);

}  // namespace culprit::data
