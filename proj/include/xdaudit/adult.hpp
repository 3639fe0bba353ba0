#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "xdaudit/dataset.hpp"

namespace xdaudit::adult {

// UCI census files: 14 attributes plus the income label.
constexpr std::size_t kFieldCount = 15;

struct AdultConfig {
  std::string train_path = "adult.data";
  std::string test_path = "adult.test";
  bool drop_missing = true;
  std::set<std::string> excluded_columns;
  std::string sensitive_column = "sex";
  std::string disadvantaged_value = "Male";

  // Applies the ADULT_DATA_DIR environment override, when set.
  void resolve_paths();
};

struct AdultRecord {
  std::array<std::string, kFieldCount> fields;
  bool from_test = false;
};

struct LoadResult {
  std::vector<AdultRecord> records;
  std::vector<std::string> warnings;
};

// Parses both comma-separated files; skips the test file's "|1x3 Cross
// validator" header and strips trailing periods from its labels. A total
// other than 48842 produces an integrity warning, not an error.
LoadResult load_raw(const AdultConfig& cfg);

// Preprocessed dataset plus what is needed to invert the encoding: the
// one-hot block per categorical column and the standardization constants
// per continuous column.
struct EncodedDataset {
  TabularDataset data;
  std::map<std::string, std::vector<std::string>> encoding;
  std::map<std::string, std::pair<double, double>> cont_scaler;  // mean, sd

  // Raw categorical value of one row; inverts the one-hot encoding.
  std::string decode_categorical(std::size_t row, const std::string& column) const;
  // Raw value of one continuous column (undoes standardization).
  double raw_continuous(std::size_t row, const std::string& column) const;

  EncodedDataset with_data(TabularDataset new_data) const;
};

// Drops missing-valued rows, one-hot encodes categoricals, standardizes
// continuous columns, maps sex to {0 = Male (disadvantaged), 1 = Female}
// and renames native-country to nationality. fnlwgt and the redundant
// education string are dropped; education-num is kept.
EncodedDataset preprocess(const std::vector<AdultRecord>& records,
                          const AdultConfig& cfg);

struct InteractionTestResult {
  std::vector<double> coefficients;  // intercept, x1, x2, x1*x2
  std::vector<double> standard_errors;
  double interaction_p_value = 0.0;
  int iterations = 0;
};

// Newton-Raphson logistic fit of y on {1, x1, x2, x1*x2}; Wald p-value for
// the interaction coefficient. Throws FitError with the final gradient norm
// after 100 iterations without convergence.
InteractionTestResult fit_interaction_logit(const std::vector<double>& x1,
                                            const std::vector<double>& x2,
                                            const std::vector<int>& y);

// logit(income) = b0 + b1*sex + b2*hours + b3*sex*hours on the encoded data.
InteractionTestResult concept_shift_test(const EncodedDataset& ds);

struct Scenario {
  enum class Kind { Proportion, HoursCap, DropColumns, Balanced5050 };
  Kind kind = Kind::Balanced5050;
  double proportion = 0.0;            // Proportion: share of proportion_group
  int proportion_group = 0;           // 0 = disadvantaged (default), 1 = advantaged
  double hours_cap = 0.0;             // HoursCap: raw hours threshold
  std::vector<std::string> drop;      // DropColumns: "sex" and/or "nationality"
};

// Applies one experimental restriction to a (training) dataset. The test
// split must never pass through here.
TabularDataset build_scenario(const EncodedDataset& enc, const TabularDataset& train,
                              const Scenario& scenario, std::uint64_t seed);

}  // namespace xdaudit::adult
