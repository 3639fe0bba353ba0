#include "xdaudit/adult.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "xdaudit/dgp.hpp"
#include "xdaudit/errors.hpp"
#include "xdaudit/linalg.hpp"
#include "xdaudit/rng.hpp"
#include "xdaudit/stats.hpp"

namespace xdaudit::adult {

namespace {

constexpr const char* kColumnNames[kFieldCount] = {
    "age",          "workclass",    "fnlwgt",       "education",
    "education-num", "marital-status", "occupation", "relationship",
    "race",         "sex",          "capital-gain", "capital-loss",
    "hours-per-week", "nationality", "income"};

constexpr std::size_t kAge = 0, kWorkclass = 1, kFnlwgt = 2, kEducation = 3,
                      kEducationNum = 4, kMarital = 5, kOccupation = 6,
                      kRelationship = 7, kRace = 8, kSex = 9, kCapitalGain = 10,
                      kCapitalLoss = 11, kHours = 12, kNationality = 13,
                      kIncome = 14;

const std::vector<std::size_t> kContinuous = {kAge, kEducationNum, kCapitalGain,
                                              kCapitalLoss, kHours};
const std::vector<std::size_t> kCategorical = {kWorkclass, kMarital, kOccupation,
                                               kRelationship, kRace, kNationality};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void parse_file(const std::string& path, bool is_test,
                std::vector<AdultRecord>& records) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (is_test && line_no == 1 && stripped.front() == '|') continue;  // header

    AdultRecord rec;
    rec.from_test = is_test;
    std::size_t field = 0, pos = 0;
    while (pos <= line.size() && field < kFieldCount) {
      std::size_t next = line.find(',', pos);
      if (next == std::string::npos) next = line.size();
      rec.fields[field++] = trim(line.substr(pos, next - pos));
      if (next == line.size()) break;
      pos = next + 1;
    }
    if (field != kFieldCount || line.find(',', pos) != std::string::npos)
      throw ParseError(path + ":" + std::to_string(line_no) +
                           ": expected 15 comma-separated fields",
                       line_no);
    // The test file writes labels with a trailing period.
    std::string& label = rec.fields[kIncome];
    if (!label.empty() && label.back() == '.') label.pop_back();
    records.push_back(std::move(rec));
  }
}

}  // namespace

void AdultConfig::resolve_paths() {
  const char* dir = std::getenv("ADULT_DATA_DIR");
  if (!dir || !*dir) return;
  train_path = std::string(dir) + "/adult.data";
  test_path = std::string(dir) + "/adult.test";
}

LoadResult load_raw(const AdultConfig& cfg) {
  LoadResult result;
  parse_file(cfg.train_path, false, result.records);
  parse_file(cfg.test_path, true, result.records);
  if (result.records.size() != 48842)
    result.warnings.push_back("expected 48842 records, parsed " +
                              std::to_string(result.records.size()));
  return result;
}

EncodedDataset preprocess(const std::vector<AdultRecord>& records,
                          const AdultConfig& cfg) {
  std::vector<const AdultRecord*> kept;
  for (const auto& rec : records) {
    if (cfg.drop_missing) {
      bool missing = false;
      for (const auto& f : rec.fields)
        if (f == "?") {
          missing = true;
          break;
        }
      if (missing) continue;
    }
    kept.push_back(&rec);
  }
  if (kept.empty()) throw SamplingError("no usable Adult records");

  auto excluded = [&](std::size_t field) {
    return cfg.excluded_columns.count(kColumnNames[field]) > 0;
  };

  // Category vocabularies in first-seen order.
  std::map<std::size_t, std::vector<std::string>> vocab;
  for (std::size_t field : kCategorical) {
    if (excluded(field)) continue;
    std::vector<std::string>& values = vocab[field];
    for (const auto* rec : kept) {
      const std::string& v = rec->fields[field];
      if (std::find(values.begin(), values.end(), v) == values.end())
        values.push_back(v);
    }
  }

  std::vector<Column> columns;
  std::map<std::string, std::vector<std::string>> encoding;
  std::map<std::string, std::pair<double, double>> cont_scaler;
  std::vector<std::vector<double>> cols;

  auto add_column = [&](const std::string& name, ColumnKind kind) {
    columns.push_back({name, kind});
    cols.emplace_back(kept.size(), 0.0);
    return cols.size() - 1;
  };

  const bool sex_included = !excluded(kSex);
  std::size_t sex_col = 0;
  if (sex_included) sex_col = add_column("sex", ColumnKind::Binary);

  std::map<std::size_t, std::size_t> cont_col;
  for (std::size_t field : kContinuous) {
    if (field == kFnlwgt || excluded(field)) continue;
    cont_col[field] = add_column(kColumnNames[field], ColumnKind::Continuous);
  }
  std::map<std::size_t, std::size_t> cat_base;
  for (std::size_t field : kCategorical) {
    if (excluded(field)) continue;
    cat_base[field] = cols.size();
    std::vector<std::string> block;
    for (const auto& v : vocab[field]) {
      const std::string name = std::string(kColumnNames[field]) + "=" + v;
      add_column(name, ColumnKind::Binary);
      block.push_back(name);
    }
    encoding[kColumnNames[field]] = std::move(block);
  }

  std::vector<int> y(kept.size()), sensitive(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const AdultRecord& rec = *kept[i];
    const bool disadvantaged = rec.fields[kSex] == cfg.disadvantaged_value;
    sensitive[i] = disadvantaged ? 0 : 1;
    if (sex_included) cols[sex_col][i] = disadvantaged ? 0.0 : 1.0;
    y[i] = rec.fields[kIncome] == ">50K" ? 1 : 0;
    for (const auto& [field, col] : cont_col) {
      try {
        cols[col][i] = std::stod(rec.fields[field]);
      } catch (const std::exception&) {
        throw ParseError("non-numeric value '" + rec.fields[field] + "' in " +
                             kColumnNames[field],
                         i);
      }
    }
    for (const auto& [field, base] : cat_base) {
      const auto& values = vocab[field];
      const auto it =
          std::find(values.begin(), values.end(), rec.fields[field]);
      if (it == values.end())
        throw SchemaError("unknown category '" + rec.fields[field] + "' for " +
                          kColumnNames[field]);
      cols[base + static_cast<std::size_t>(it - values.begin())][i] = 1.0;
    }
  }

  // Standardize continuous columns in place; remember the constants.
  for (const auto& [field, col] : cont_col) {
    const double m = stats::mean(cols[col]);
    double sd = stats::sd_population(cols[col]);
    if (sd == 0.0) sd = 1.0;
    for (double& v : cols[col]) v = (v - m) / sd;
    cont_scaler[kColumnNames[field]] = {m, sd};
  }

  Matrix x(kept.size(), cols.size());
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) x(i, j) = cols[j][i];
  return EncodedDataset{TabularDataset(std::move(columns), std::move(x), std::move(y),
                                       std::move(sensitive), "adult"),
                        std::move(encoding), std::move(cont_scaler)};
}

std::string EncodedDataset::decode_categorical(std::size_t row,
                                               const std::string& column) const {
  const auto it = encoding.find(column);
  if (it == encoding.end()) throw SchemaError("no encoded block for '" + column + "'");
  for (const auto& name : it->second) {
    const std::size_t col = data.require_column(name);
    if (data.value(row, col) == 1.0) return name.substr(name.find('=') + 1);
  }
  throw SchemaError("one-hot block for '" + column + "' has no active slot");
}

double EncodedDataset::raw_continuous(std::size_t row, const std::string& column) const {
  const auto it = cont_scaler.find(column);
  if (it == cont_scaler.end()) throw SchemaError("no scaler for '" + column + "'");
  const std::size_t col = data.require_column(column);
  return data.value(row, col) * it->second.second + it->second.first;
}

EncodedDataset EncodedDataset::with_data(TabularDataset new_data) const {
  EncodedDataset out = *this;
  out.data = std::move(new_data);
  return out;
}

InteractionTestResult fit_interaction_logit(const std::vector<double>& x1,
                                            const std::vector<double>& x2,
                                            const std::vector<int>& y) {
  const std::size_t n = y.size();
  if (x1.size() != n || x2.size() != n)
    throw SchemaError("interaction fit inputs must have equal length");

  Matrix x(n, 4);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = x1[i];
    x(i, 2) = x2[i];
    x(i, 3) = x1[i] * x2[i];
  }

  std::vector<double> beta(4, 0.0);
  double grad_norm = 0.0;
  InteractionTestResult result;
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<double> grad(4, 0.0);
    Matrix hess(4, 4);
    for (std::size_t i = 0; i < n; ++i) {
      double z = 0.0;
      for (std::size_t j = 0; j < 4; ++j) z += beta[j] * x(i, j);
      const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                                : std::exp(z) / (1.0 + std::exp(z));
      const double r = static_cast<double>(y[i]) - p;
      const double w = std::max(p * (1.0 - p), 1e-10);
      for (std::size_t j = 0; j < 4; ++j) {
        grad[j] += r * x(i, j);
        for (std::size_t k = j; k < 4; ++k) hess(j, k) += w * x(i, j) * x(i, k);
      }
    }
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t k = 0; k < j; ++k) hess(j, k) = hess(k, j);

    grad_norm = 0.0;
    for (double g : grad) grad_norm += g * g;
    grad_norm = std::sqrt(grad_norm);
    result.iterations = iter + 1;
    if (grad_norm < 1e-8) {
      // Wald standard errors from the inverse Fisher information.
      std::vector<double> se(4, 0.0);
      for (std::size_t j = 0; j < 4; ++j) {
        std::vector<double> e(4, 0.0), col;
        e[j] = 1.0;
        if (!solve_symmetric(hess, e, col))
          throw FitError("singular Fisher information", grad_norm);
        se[j] = std::sqrt(std::max(col[j], 0.0));
      }
      result.coefficients = beta;
      result.standard_errors = se;
      result.interaction_p_value =
          se[3] > 0.0 ? stats::normal_two_sided_p(beta[3] / se[3]) : 0.0;
      return result;
    }

    std::vector<double> step;
    if (!solve_symmetric(hess, grad, step))
      throw FitError("singular Hessian in logistic fit", grad_norm);
    for (std::size_t j = 0; j < 4; ++j) beta[j] += step[j];
  }
  throw FitError("logistic fit did not converge in 100 iterations", grad_norm);
}

InteractionTestResult concept_shift_test(const EncodedDataset& ds) {
  const std::size_t sex = ds.data.require_column("sex");
  const std::size_t hours = ds.data.require_column("hours-per-week");
  return fit_interaction_logit(ds.data.column_values(sex),
                               ds.data.column_values(hours), ds.data.labels());
}

TabularDataset build_scenario(const EncodedDataset& enc, const TabularDataset& train,
                              const Scenario& scenario, std::uint64_t seed) {
  switch (scenario.kind) {
    case Scenario::Kind::Proportion:
      if (scenario.proportion_group == 0)
        return dgp::apply_proportion_filter(train, scenario.proportion, seed);
      return dgp::subsample_group_share(train, scenario.proportion_group,
                                        scenario.proportion, seed);

    case Scenario::Kind::HoursCap: {
      const auto it = enc.cont_scaler.find("hours-per-week");
      if (it == enc.cont_scaler.end())
        throw SchemaError("hours-per-week scaler missing");
      const double cap_std =
          (scenario.hours_cap - it->second.first) / it->second.second;
      const std::size_t hours = train.require_column("hours-per-week");
      std::vector<std::size_t> keep;
      for (std::size_t r = 0; r < train.n_rows(); ++r) {
        if (train.sensitive()[r] == 0 && train.value(r, hours) >= cap_std) continue;
        keep.push_back(r);
      }
      if (keep.empty()) throw SamplingError("hours cap removed every row");
      return train.select_rows(keep);
    }

    case Scenario::Kind::DropColumns: {
      std::vector<std::string> names;
      for (const auto& col : train.columns()) {
        bool dropped = false;
        for (const auto& d : scenario.drop) {
          if (col.name == d || col.name.rfind(d + "=", 0) == 0) {
            dropped = true;
            break;
          }
        }
        if (!dropped) names.push_back(col.name);
      }
      return train.select_columns(names);
    }

    case Scenario::Kind::Balanced5050: {
      const auto g0 = train.rows_in_group(0);
      const auto g1 = train.rows_in_group(1);
      if (g0.empty() || g1.empty())
        throw SamplingError("both groups required for balancing");
      const std::size_t k = std::min(g0.size(), g1.size());
      Rng rng(seed);
      Rng rng0 = rng.stream("balance0");
      Rng rng1 = rng.stream("balance1");
      std::vector<std::size_t> keep;
      for (std::size_t i : rng0.sample_without_replacement(g0.size(), k))
        keep.push_back(g0[i]);
      for (std::size_t i : rng1.sample_without_replacement(g1.size(), k))
        keep.push_back(g1[i]);
      std::sort(keep.begin(), keep.end());
      return train.select_rows(keep);
    }
  }
  throw ConfigError("unknown scenario kind");
}

}  // namespace xdaudit::adult
