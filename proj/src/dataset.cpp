#include "xdaudit/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "xdaudit/errors.hpp"

namespace xdaudit {

TabularDataset::TabularDataset(std::vector<Column> columns, Matrix x,
                               std::vector<int> y, std::vector<int> sensitive,
                               std::string provenance)
    : columns_(std::move(columns)),
      x_(std::move(x)),
      y_(std::move(y)),
      sensitive_(std::move(sensitive)),
      provenance_(std::move(provenance)) {
  if (x_.cols() != columns_.size())
    throw SchemaError("column list does not match feature matrix width");
  if (x_.rows() != y_.size() || x_.rows() != sensitive_.size())
    throw SchemaError("row count mismatch between X, y and sensitive");
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].kind != ColumnKind::Binary) continue;
    for (std::size_t i = 0; i < x_.rows(); ++i) {
      const double v = x_(i, j);
      if (v != 0.0 && v != 1.0)
        throw SchemaError("binary column '" + columns_[j].name +
                          "' contains non {0,1} value");
    }
  }
}

std::optional<std::size_t> TabularDataset::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j)
    if (columns_[j].name == name) return j;
  return std::nullopt;
}

std::size_t TabularDataset::require_column(const std::string& name) const {
  auto idx = column_index(name);
  if (!idx) throw SchemaError("missing column '" + name + "'");
  return *idx;
}

std::vector<std::size_t> TabularDataset::rows_in_group(int group) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < sensitive_.size(); ++i)
    if (sensitive_[i] == group) rows.push_back(i);
  return rows;
}

std::size_t TabularDataset::group_count(int group) const {
  std::size_t n = 0;
  for (int g : sensitive_)
    if (g == group) ++n;
  return n;
}

TabularDataset TabularDataset::select_rows(std::span<const std::size_t> rows) const {
  Matrix x(rows.size(), n_cols());
  std::vector<int> y(rows.size()), s(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    for (std::size_t j = 0; j < n_cols(); ++j) x(i, j) = x_(r, j);
    y[i] = y_[r];
    s[i] = sensitive_[r];
  }
  return TabularDataset(columns_, std::move(x), std::move(y), std::move(s),
                        provenance_);
}

TabularDataset TabularDataset::select_columns(const std::vector<std::string>& names) const {
  std::vector<std::size_t> idx;
  std::vector<Column> cols;
  for (const auto& name : names) {
    idx.push_back(require_column(name));
    cols.push_back(columns_[idx.back()]);
  }
  Matrix x(n_rows(), idx.size());
  for (std::size_t i = 0; i < n_rows(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) x(i, j) = x_(i, idx[j]);
  return TabularDataset(std::move(cols), std::move(x), y_, sensitive_, provenance_);
}

std::vector<double> TabularDataset::column_values(std::size_t col) const {
  std::vector<double> v(n_rows());
  for (std::size_t i = 0; i < n_rows(); ++i) v[i] = x_(i, col);
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void TabularDataset::save_csv(const std::string& path,
                              const std::map<std::string, std::string>& metadata) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (std::size_t j = 0; j < columns_.size(); ++j) out << columns_[j].name << ',';
  out << "Y\n";
  for (std::size_t i = 0; i < n_rows(); ++i) {
    for (std::size_t j = 0; j < n_cols(); ++j)
      out << format_double(x_(i, j)) << ',';
    out << y_[i] << '\n';
  }
  if (!out) throw IoError("write failure on '" + path + "'");

  std::ofstream meta(path + ".meta");
  if (!meta) throw IoError("cannot open '" + path + ".meta' for writing");
  for (const auto& [k, v] : metadata) meta << k << '=' << v << '\n';
}

std::map<std::string, std::string> TabularDataset::load_metadata(const std::string& csv_path) {
  std::map<std::string, std::string> meta;
  std::ifstream in(csv_path + ".meta");
  if (!in) return meta;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    meta[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return meta;
}

TabularDataset TabularDataset::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  std::size_t offset = 0;
  if (!std::getline(in, line)) throw ParseError("empty CSV", 0);

  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) names.push_back(field);
  }
  if (names.size() < 2 || names.back() != "Y")
    throw ParseError("header must end with Y column", 0);
  names.pop_back();
  offset += line.size() + 1;

  const auto meta = load_metadata(path);
  const std::string sensitive_name =
      meta.count("sensitive_column") ? meta.at("sensitive_column") : names.front();

  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  while (std::getline(in, line)) {
    if (line.empty()) {
      offset += 1;
      continue;
    }
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t next = line.find(',', pos);
      if (next == std::string::npos) next = line.size();
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + next, v);
      if (ec != std::errc() || ptr != line.data() + next)
        throw ParseError("bad numeric field", offset + pos);
      row.push_back(v);
      if (next == line.size()) break;
      pos = next + 1;
    }
    if (row.size() != names.size() + 1)
      throw ParseError("wrong field count", offset);
    y.push_back(static_cast<int>(row.back()));
    row.pop_back();
    rows.push_back(std::move(row));
    offset += line.size() + 1;
  }

  std::vector<Column> columns;
  for (std::size_t j = 0; j < names.size(); ++j) {
    bool binary = true;
    for (const auto& r : rows)
      if (r[j] != 0.0 && r[j] != 1.0) {
        binary = false;
        break;
      }
    columns.push_back({names[j], binary ? ColumnKind::Binary : ColumnKind::Continuous});
  }
  Matrix x(rows.size(), names.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < names.size(); ++j) x(i, j) = rows[i][j];

  std::vector<int> sensitive(rows.size(), 0);
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] != sensitive_name) continue;
    for (std::size_t i = 0; i < rows.size(); ++i)
      sensitive[i] = static_cast<int>(x(i, j));
  }
  return TabularDataset(std::move(columns), std::move(x), std::move(y),
                        std::move(sensitive), "loaded:" + path);
}

}  // namespace xdaudit
