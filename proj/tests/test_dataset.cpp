#include "xdaudit/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "xdaudit/errors.hpp"

using namespace xdaudit;

namespace {

TabularDataset tiny() {
  Matrix x(3, 2);
  x(0, 0) = 0.0;
  x(0, 1) = 1.5;
  x(1, 0) = 1.0;
  x(1, 1) = -2.25;
  x(2, 0) = 1.0;
  x(2, 1) = 0.1;
  return TabularDataset({{"A", ColumnKind::Binary}, {"L", ColumnKind::Continuous}},
                        std::move(x), {0, 1, 1}, {0, 1, 1}, "test");
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("constructor enforces shape and binary invariants") {
  Matrix x(2, 1);
  x(0, 0) = 0.5;
  CHECK_THROWS_AS(TabularDataset({{"A", ColumnKind::Binary}}, x, {0, 1}, {0, 1}),
                  SchemaError);
  CHECK_THROWS_AS(TabularDataset({{"L", ColumnKind::Continuous}}, x, {0}, {0, 1}),
                  SchemaError);
}

TEST_CASE("row and column selection produce new values") {
  const auto ds = tiny();
  const std::vector<std::size_t> rows = {2, 0};
  const auto sub = ds.select_rows(rows);
  CHECK(sub.n_rows() == 2);
  CHECK(sub.value(0, 1) == 0.1);
  CHECK(sub.value(1, 1) == 1.5);
  CHECK(sub.labels()[0] == 1);
  // Original untouched.
  CHECK(ds.n_rows() == 3);

  const auto cols = ds.select_columns({"L"});
  CHECK(cols.n_cols() == 1);
  CHECK(cols.columns()[0].name == "L");
  CHECK_THROWS_AS(ds.select_columns({"nope"}), SchemaError);
}

TEST_CASE("group helpers") {
  const auto ds = tiny();
  CHECK(ds.group_count(0) == 1);
  CHECK(ds.group_count(1) == 2);
  CHECK(ds.rows_in_group(1) == std::vector<std::size_t>{1, 2});
}

TEST_CASE("CSV round trip preserves values bit-exactly") {
  const auto ds = tiny();
  const std::string path = temp_path("xdaudit_ds_test.csv");
  ds.save_csv(path, {{"sensitive_column", "A"}, {"origin", "unit-test"}});
  const auto back = TabularDataset::load_csv(path);
  CHECK(back.n_rows() == ds.n_rows());
  CHECK(back.features() == ds.features());
  CHECK(back.labels() == ds.labels());
  CHECK(back.sensitive() == ds.sensitive());
  CHECK(back.columns()[0].kind == ColumnKind::Binary);
  CHECK(back.columns()[1].kind == ColumnKind::Continuous);
  const auto meta = TabularDataset::load_metadata(path);
  CHECK(meta.at("origin") == "unit-test");
  std::remove(path.c_str());
  std::remove((path + ".meta").c_str());
}

TEST_CASE("malformed CSV reports parse errors") {
  const std::string path = temp_path("xdaudit_bad.csv");
  {
    std::ofstream out(path);
    out << "A,L,Y\n1,2,1\n1,huh,0\n";
  }
  CHECK_THROWS_AS(TabularDataset::load_csv(path), ParseError);
  std::remove(path.c_str());
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-8, 123456.789, 0.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}
