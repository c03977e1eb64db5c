#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "culprit/data/table.hpp"
#include "culprit/errors.hpp"

using namespace culprit;
using namespace culprit::data;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("culprit_data_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "_" +
            std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name, std::ios::binary) << text;
    return path / name;
  }
};

Schema demo_schema() {
  return {{"id", ColumnKind::Identifier},
          {"height", ColumnKind::Numeric},
          {"shirt", ColumnKind::Categorical},
          {"label", ColumnKind::Label}};
}

RawTable numbered_table(std::size_t n) {
  RawTable t{{{"id", ColumnKind::Identifier}, {"x", ColumnKind::Numeric}}, {}, 0};
  for (std::size_t i = 0; i < n; ++i) t.rows.push_back({std::to_string(i), static_cast<double>(i)});
  return t;
}

std::set<double> xs(const RawTable& t) {
  std::set<double> out;
  for (const auto& r : t.rows) out.insert(std::get<double>(r[1]));
  return out;
}

}  // namespace

TEST_CASE("csv parser handles quotes, doubled quotes and CRLF") {
  std::istringstream in("a,b,c\r\n\"x,1\",\"say \"\"hi\"\"\",3\r\n\n4,,6\n");
  const auto recs = parse_csv(in);
  REQUIRE(recs.size() == 3);
  CHECK(recs[1] == std::vector<std::string>{"x,1", "say \"hi\"", "3"});
  CHECK(recs[2] == std::vector<std::string>{"4", "", "6"});
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,\"b\"") == "\"a,\"\"b\"\"\"");

  std::istringstream bad("a,\"unterminated\n");
  CHECK_THROWS_AS(parse_csv(bad), DataError);
}

TEST_CASE("split of 100 rows is 60/20/20 with no leakage") {
  const RawTable t = numbered_table(100);
  const Splits s = split(t, {0.2, 0.2, 7});
  CHECK(s.train.size() == 60);
  CHECK(s.validation.size() == 20);
  CHECK(s.test.size() == 20);

  const auto a = xs(s.train), b = xs(s.validation), c = xs(s.test);
  std::set<double> all;
  all.insert(a.begin(), a.end());
  all.insert(b.begin(), b.end());
  all.insert(c.begin(), c.end());
  CHECK(all.size() == 100);
  for (double v : b) CHECK(a.count(v) == 0);
  for (double v : c) CHECK(a.count(v) == 0);
  for (double v : c) CHECK(b.count(v) == 0);
}

TEST_CASE("split is seed-deterministic and seed-sensitive") {
  const auto a = split_indices(50, {0.2, 0.2, 3});
  const auto b = split_indices(50, {0.2, 0.2, 3});
  const auto c = split_indices(50, {0.2, 0.2, 4});
  CHECK(a.train == b.train);
  CHECK(a.test == b.test);
  CHECK(a.train != c.train);
}

TEST_CASE("split rejects bad fractions") {
  CHECK_THROWS_AS(split_indices(10, {0.5, 0.5, 0}), ConfigError);
  CHECK_THROWS_AS(split_indices(10, {-0.1, 0.2, 0}), ConfigError);
  CHECK_THROWS_AS(split_indices(0, {0.2, 0.2, 0}), DataError);
}

TEST_CASE("load_csv drops malformed rows and counts them") {
  TempDir dir;
  const auto p = dir.write("t.csv",
                           "id,height,shirt,label\n"
                           "a,1.5,red,0\n"
                           "b,oops,blue,1\n"
                           "c,2.5,blue\n"
                           "d,3.5,green,nan\n"
                           "e,4.5,\"red\",1\n");
  const RawTable t = load_csv(p, demo_schema());
  CHECK(t.size() == 2);
  CHECK(t.dropped_rows == 3);
  CHECK(std::get<std::string>(t.rows[1][0]) == "e");
  CHECK(std::get<double>(t.rows[1][1]) == 4.5);
}

TEST_CASE("load_csv rejects a shuffled header") {
  TempDir dir;
  const auto p = dir.write("t.csv", "id,shirt,height,label\na,red,1.5,0\n");
  CHECK_THROWS_AS(load_csv(p, demo_schema()), SchemaError);
  const auto missing = dir.path / "absent.csv";
  CHECK_THROWS_AS(load_csv(missing, demo_schema()), IoError);
}

TEST_CASE("header names are trimmed") {
  TempDir dir;
  const auto p = dir.write("t.csv", " id , height ,shirt,label\na,1,red,0\n");
  CHECK(load_csv(p, demo_schema()).size() == 1);
}

TEST_CASE("schema sidecar parses kinds and rejects junk") {
  TempDir dir;
  const auto good = dir.write("s.txt", "# columns\nid = identifier\nheight=NUMERIC\n\nshirt = categorical\nlabel = label\n");
  CHECK(load_schema(good) == demo_schema());
  CHECK_THROWS_AS(load_schema(dir.write("b1.txt", "x = colour\n")), SchemaError);
  CHECK_THROWS_AS(load_schema(dir.write("b2.txt", "x numeric\n")), SchemaError);
  CHECK_THROWS_AS(load_schema(dir.write("b3.txt", "x = numeric\nx = label\n")), SchemaError);
  CHECK_THROWS_AS(load_schema(dir.write("b4.txt", "# nothing\n")), SchemaError);
}

TEST_CASE("minmax scaling is idempotent after refit") {
  RawTable t{{{"x", ColumnKind::Numeric}, {"y", ColumnKind::Numeric}}, {}, 0};
  t.rows = {{3.0, 5.0}, {-1.0, 5.0}, {7.0, 5.0}, {0.5, 5.0}};
  const RawTable once = apply_scaler(t, fit_scaler(t, ScalerMode::MinMax));
  const RawTable twice = apply_scaler(once, fit_scaler(once, ScalerMode::MinMax));
  for (std::size_t r = 0; r < t.size(); ++r) {
    CHECK(std::get<double>(once.rows[r][0]) == doctest::Approx(std::get<double>(twice.rows[r][0])).epsilon(1e-12));
    CHECK(std::get<double>(once.rows[r][1]) == 0.0);  // constant column
  }
  CHECK(std::get<double>(once.rows[1][0]) == 0.0);
  CHECK(std::get<double>(once.rows[2][0]) == 1.0);
}

TEST_CASE("standard scaling centres training data") {
  RawTable t{{{"x", ColumnKind::Numeric}}, {{1.0}, {2.0}, {3.0}, {6.0}}, 0};
  const auto stats = fit_scaler(t, ScalerMode::Standard);
  CHECK(stats.columns[0].mean == 3.0);
  CHECK(stats.columns[0].std == doctest::Approx(std::sqrt(3.5)));
  const RawTable z = apply_scaler(t, stats);
  double sum = 0.0, sq = 0.0;
  for (const auto& r : z.rows) {
    sum += std::get<double>(r[0]);
    sq += std::get<double>(r[0]) * std::get<double>(r[0]);
  }
  CHECK(sum == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(sq / 4.0 == doctest::Approx(1.0));
}

TEST_CASE("one-hot encodes seen categories and zeros unseen ones") {
  RawTable train{{{"c", ColumnKind::Categorical}, {"v", ColumnKind::Numeric}}, {}, 0};
  train.rows = {{std::string("b"), 1.0}, {std::string("a"), 2.0}, {std::string("b"), 3.0}};
  const auto vocab = fit_one_hot(train);
  REQUIRE(vocab.columns.size() == 1);
  CHECK(vocab.columns[0].categories == std::vector<std::string>{"b", "a"});

  RawTable test = train;
  test.rows = {{std::string("a"), 9.0}, {std::string("zebra"), 8.0}};
  const RawTable enc = apply_one_hot(test, vocab);
  REQUIRE(enc.schema.size() == 3);
  CHECK(enc.schema[0].name == "c=b");
  CHECK(enc.schema[1].name == "c=a");
  CHECK(std::get<double>(enc.rows[0][0]) == 0.0);
  CHECK(std::get<double>(enc.rows[0][1]) == 1.0);
  CHECK(std::get<double>(enc.rows[1][0]) == 0.0);
  CHECK(std::get<double>(enc.rows[1][1]) == 0.0);
  CHECK(std::get<double>(enc.rows[1][2]) == 8.0);
}

TEST_CASE("to_case_records maps columns and validates labels") {
  RawTable t{{{"id", ColumnKind::Identifier}, {"f", ColumnKind::Numeric}, {"g", ColumnKind::Numeric},
              {"label", ColumnKind::Label}},
             {},
             0};
  t.rows = {{std::string("k1"), 0.5, 1.5, 2.0}};
  const auto recs = to_case_records(t, "label", 3);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].case_id == "k1");
  CHECK(recs[0].culprit_index == 2);
  CHECK(recs[0].features.values == std::vector<double>{0.5, 1.5});

  t.rows = {{std::string("k2"), 0.5, 1.5, 3.0}};
  CHECK_THROWS_AS(to_case_records(t, "label", 3), DataError);
  t.rows = {{std::string("k3"), 0.5, 1.5, 0.5}};
  CHECK_THROWS_AS(to_case_records(t, "label", 3), DataError);
  CHECK_THROWS_AS(to_case_records(t, "nope", 3), SchemaError);
}

TEST_CASE("case files round-trip bit-exactly") {
  TempDir dir;
  std::vector<env::CaseRecord> cases = {
      {"a,1", {{0.1, -1.0 / 3.0}, vision::DescriptorKind::Tabular}, 4, 3},
      {"b", {{1e-300, 12345.678}, vision::DescriptorKind::Tabular}, 4, 0},
  };
  const auto p = dir.path / "cases.csv";
  write_cases_csv(p, cases);
  const CaseFile back = load_cases_csv(p);
  REQUIRE(back.records.size() == 2);
  CHECK(back.dropped_rows == 0);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.records[i].case_id == cases[i].case_id);
    CHECK(back.records[i].culprit_index == cases[i].culprit_index);
    CHECK(back.records[i].n_suspects == cases[i].n_suspects);
    CHECK(back.records[i].features.values == cases[i].features.values);
  }
}

TEST_CASE("case file with out-of-range culprit is a data error") {
  TempDir dir;
  const auto p = dir.write("c.csv", "case_id,culprit_index,n_suspects,f0\nx,5,4,0.1\n");
  CHECK_THROWS_AS(load_cases_csv(p), DataError);
  const auto h = dir.write("h.csv", "id,culprit,n,f0\nx,1,4,0.1\n");
  CHECK_THROWS_AS(load_cases_csv(h), SchemaError);
}

TEST_CASE("write_csv then load_csv reproduces the table") {
  TempDir dir;
  RawTable t{demo_schema(), {}, 0};
  t.rows = {{std::string("a"), 0.1, std::string("red, dark"), 1.0}, {std::string("b"), 2.0 / 3.0, std::string("blue"), 0.0}};
  const auto p = dir.path / "t.csv";
  write_csv(p, t);
  const RawTable back = load_csv(p, demo_schema());
  CHECK(back.rows == t.rows);
}

TEST_CASE("scaler examples: [0,5,10], unclipped test value, constant column") {
  RawTable train{{{"x", ColumnKind::Numeric}}, {{0.0}, {5.0}, {10.0}}, 0};
  const auto mm = fit_scaler(train, ScalerMode::MinMax);
  CHECK(mm.columns[0].min == 0.0);
  CHECK(mm.columns[0].max == 10.0);
  const RawTable scaled = apply_scaler(train, mm);
  CHECK(std::get<double>(scaled.rows[0][0]) == 0.0);
  CHECK(std::get<double>(scaled.rows[1][0]) == 0.5);
  CHECK(std::get<double>(scaled.rows[2][0]) == 1.0);

  RawTable test{train.schema, {{20.0}}, 0};
  CHECK(std::get<double>(apply_scaler(test, mm).rows[0][0]) == 2.0);

  RawTable flat{train.schema, {{2.0}, {2.0}, {2.0}}, 0};
  const auto st = fit_scaler(flat, ScalerMode::Standard);
  CHECK(st.columns[0].mean == 2.0);
  CHECK(st.columns[0].std == 0.0);
  for (const auto& r : apply_scaler(flat, st).rows) CHECK(std::get<double>(r[0]) == 0.0);

  CHECK_THROWS_AS(fit_scaler(RawTable{train.schema, {}, 0}, ScalerMode::MinMax), DataError);
  RawTable other{{{"y", ColumnKind::Numeric}}, {{1.0}}, 0};
  CHECK_THROWS_AS(apply_scaler(other, mm), SchemaError);
}

TEST_CASE("no leakage: perturbing test rows never changes fitted statistics") {
  RawTable t{{{"x", ColumnKind::Numeric}, {"c", ColumnKind::Categorical}}, {}, 0};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const char* cats[] = {"a", "b", "c"};
  for (int i = 0; i < 100; ++i) t.rows.push_back({u(rng), std::string(cats[i % 3])});

  const SplitSpec spec{0.2, 0.2, 5};
  const Splits base = split(t, spec);
  const auto stats = fit_scaler(base.train, ScalerMode::Standard);
  const auto vocab = fit_one_hot(base.train);

  const SplitIndices idx = split_indices(t.size(), spec);
  for (int trial = 0; trial < 20; ++trial) {
    RawTable perturbed = t;
    for (std::size_t i : idx.test) {
      perturbed.rows[i][0] = u(rng) * 1000.0;
      perturbed.rows[i][1] = std::string("unseen") + std::to_string(trial);
    }
    for (std::size_t i : idx.validation) perturbed.rows[i][0] = u(rng);
    const Splits s = split(perturbed, spec);
    CHECK(fit_scaler(s.train, ScalerMode::Standard) == stats);
    CHECK(fit_scaler(s.train, ScalerMode::MinMax) == fit_scaler(base.train, ScalerMode::MinMax));
    CHECK(fit_one_hot(s.train) == vocab);
  }
}

TEST_CASE("split partitions are exhaustive as a multiset") {
  RawTable t{{{"x", ColumnKind::Numeric}}, {}, 0};
  for (int i = 0; i < 37; ++i) t.rows.push_back({static_cast<double>(i % 5)});
  const Splits s = split(t, {0.2, 0.2, 1});
  std::multiset<double> a, b;
  for (const auto& r : t.rows) a.insert(std::get<double>(r[0]));
  for (const RawTable* p : {&s.train, &s.validation, &s.test}) {
    for (const auto& r : p->rows) b.insert(std::get<double>(r[0]));
  }
  CHECK(a == b);
  CHECK(s.test.size() == 7);
  CHECK(s.validation.size() == 7);
  CHECK(s.train.size() == 23);
}

TEST_CASE("well-formed three-row file loads with nothing dropped") {
  TempDir dir;
  const auto p = dir.write("t.csv", "id,height,shirt,label\na,1,red,0\nb,2,blue,1\nc,3,red,2\n");
  const RawTable t = load_csv(p, demo_schema());
  CHECK(t.size() == 3);
  CHECK(t.dropped_rows == 0);
  const auto recs = to_case_records(apply_one_hot(t, fit_one_hot(t)), "label", 3);
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].features.values == std::vector<double>{1.0, 1.0, 0.0});
}
