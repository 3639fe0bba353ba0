#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xdaudit/linalg.hpp"

namespace xdaudit {

enum class ColumnKind { Continuous, Binary };

struct Column {
  std::string name;
  ColumnKind kind;
  bool operator==(const Column&) const = default;
};

// Immutable tabular dataset: feature matrix with named columns, binary
// labels and a binary sensitive attribute (0 = disadvantaged group). All
// derived datasets are new values; nothing mutates in place.
class TabularDataset {
 public:
  TabularDataset(std::vector<Column> columns, Matrix x, std::vector<int> y,
                 std::vector<int> sensitive, std::string provenance = "");

  std::size_t n_rows() const { return x_.rows(); }
  std::size_t n_cols() const { return x_.cols(); }

  const std::vector<Column>& columns() const { return columns_; }
  const Matrix& features() const { return x_; }
  const std::vector<int>& labels() const { return y_; }
  const std::vector<int>& sensitive() const { return sensitive_; }
  const std::string& provenance() const { return provenance_; }

  double value(std::size_t row, std::size_t col) const { return x_(row, col); }

  std::optional<std::size_t> column_index(const std::string& name) const;
  // Throws SchemaError when the column does not exist.
  std::size_t require_column(const std::string& name) const;

  std::vector<std::size_t> rows_in_group(int group) const;
  std::size_t group_count(int group) const;

  // New dataset holding exactly the given rows, in the given order.
  TabularDataset select_rows(std::span<const std::size_t> rows) const;

  // New dataset restricted to the named columns (labels/sensitive kept).
  TabularDataset select_columns(const std::vector<std::string>& names) const;

  // One column as a vector.
  std::vector<double> column_values(std::size_t col) const;

  // CSV with a header of column names plus trailing "Y"; a sidecar
  // "<path>.meta" carries provenance as key=value lines.
  void save_csv(const std::string& path,
                const std::map<std::string, std::string>& metadata = {}) const;
  static TabularDataset load_csv(const std::string& path);
  static std::map<std::string, std::string> load_metadata(const std::string& csv_path);

 private:
  std::vector<Column> columns_;
  Matrix x_;
  std::vector<int> y_;
  std::vector<int> sensitive_;
  std::string provenance_;
};

// Shortest round-trip decimal rendering of a double (same bits on reload).
std::string format_double(double v);

}  // namespace xdaudit
