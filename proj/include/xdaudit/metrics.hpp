#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xdaudit/lime.hpp"

namespace xdaudit::metrics {

enum class QKind { Accuracy, ResidualError };

std::string q_kind_name(QKind k);

struct FidelityRecord {
  std::size_t instance_id = 0;
  int group = 0;
  double q_value = 0.0;
};

struct MaxGapResult {
  double value = 0.0;
  int argmax_group = 0;
};

struct FidelityReport {
  std::vector<double> per_group_q;
  std::vector<std::size_t> n_per_group;
  double overall_q = 0.0;  // pooled (instance-weighted) mean
  double max_gap = 0.0;
  double mean_gap = 0.0;
};

// Group means indexed by group id; throws SamplingError when a group in
// {0..max} is empty.
std::vector<double> group_means(const std::vector<FidelityRecord>& records,
                                std::vector<std::size_t>* counts = nullptr);

// Maximum fidelity gap from the average: max_j (overall mean - group_j mean).
MaxGapResult max_fidelity_gap(const std::vector<FidelityRecord>& records);

// Mean fidelity gap amongst subgroups:
// 2 / (G (G - 1)) * sum_{p<j} |Q_p - Q_j|. Equals |Q_0 - Q_1| for G = 2.
double mean_fidelity_gap(const std::vector<FidelityRecord>& records);

FidelityReport fidelity_report(const std::vector<FidelityRecord>& records);

// Accuracy: q = 1{surrogate class == black-box class}. ResidualError:
// q = |blackbox_prob - surrogate_prob|.
std::vector<FidelityRecord> fidelity_from_explanations(
    const std::vector<lime::LocalExplanation>& expls, const std::vector<int>& groups,
    QKind q_kind);

// Student-t confidence interval on the mean of per-trial statistics.
std::pair<double, double> trial_ci(const std::vector<double>& values,
                                   double level = 0.95);

// Percentile bootstrap over instances within one trial, for any statistic
// of a record set.
template <typename Statistic>
std::pair<double, double> bootstrap_ci(const std::vector<FidelityRecord>& records,
                                       Statistic statistic, std::size_t n_resamples,
                                       std::uint64_t seed, double level = 0.95);

struct ReportRow {
  std::string metric;
  std::string q_kind;
  std::string group_or_all;
  double value;
  double ci_low;
  double ci_high;
};

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows);

}  // namespace xdaudit::metrics

#include "xdaudit/metrics_impl.hpp"
