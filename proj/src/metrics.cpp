#include "xdaudit/metrics.hpp"

#include <cmath>
#include <fstream>

#include "xdaudit/errors.hpp"
#include "xdaudit/stats.hpp"

namespace xdaudit::metrics {

std::string q_kind_name(QKind k) {
  return k == QKind::Accuracy ? "accuracy" : "residual_error";
}

std::vector<double> group_means(const std::vector<FidelityRecord>& records,
                                std::vector<std::size_t>* counts) {
  if (records.empty()) throw SamplingError("no fidelity records");
  int max_group = 0;
  for (const auto& r : records) max_group = std::max(max_group, r.group);
  std::vector<double> sums(max_group + 1, 0.0);
  std::vector<std::size_t> ns(max_group + 1, 0);
  for (const auto& r : records) {
    sums[r.group] += r.q_value;
    ns[r.group] += 1;
  }
  for (int g = 0; g <= max_group; ++g) {
    if (ns[g] == 0) {
      std::string sizes;
      for (std::size_t n : ns) sizes += (sizes.empty() ? "" : ", ") + std::to_string(n);
      throw SamplingError("group " + std::to_string(g) +
                          " has no records (group sizes: " + sizes + ")");
    }
    sums[g] /= static_cast<double>(ns[g]);
  }
  if (counts) *counts = ns;
  return sums;
}

MaxGapResult max_fidelity_gap(const std::vector<FidelityRecord>& records) {
  std::vector<std::size_t> counts;
  const auto q = group_means(records, &counts);
  if (q.size() < 2) throw SamplingError("max_fidelity_gap needs at least 2 groups");

  double overall = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    overall += r.q_value;
    ++n;
  }
  overall /= static_cast<double>(n);

  MaxGapResult result;
  result.value = overall - q[0];
  result.argmax_group = 0;
  for (std::size_t g = 1; g < q.size(); ++g) {
    const double gap = overall - q[g];
    if (gap > result.value) {
      result.value = gap;
      result.argmax_group = static_cast<int>(g);
    }
  }
  return result;
}

double mean_fidelity_gap(const std::vector<FidelityRecord>& records) {
  const auto q = group_means(records);
  const std::size_t g = q.size();
  if (g < 2) throw SamplingError("mean_fidelity_gap needs at least 2 groups");
  double acc = 0.0;
  for (std::size_t p = 0; p < g; ++p)
    for (std::size_t j = p + 1; j < g; ++j) acc += std::abs(q[p] - q[j]);
  return 2.0 / (static_cast<double>(g) * static_cast<double>(g - 1)) * acc;
}

FidelityReport fidelity_report(const std::vector<FidelityRecord>& records) {
  FidelityReport report;
  report.per_group_q = group_means(records, &report.n_per_group);
  double overall = 0.0;
  for (const auto& r : records) overall += r.q_value;
  report.overall_q = overall / static_cast<double>(records.size());
  report.max_gap = max_fidelity_gap(records).value;
  report.mean_gap = mean_fidelity_gap(records);
  return report;
}

std::vector<FidelityRecord> fidelity_from_explanations(
    const std::vector<lime::LocalExplanation>& expls, const std::vector<int>& groups,
    QKind q_kind) {
  if (expls.size() != groups.size())
    throw SchemaError("explanations/groups length mismatch");
  std::vector<FidelityRecord> records(expls.size());
  for (std::size_t i = 0; i < expls.size(); ++i) {
    records[i].instance_id = expls[i].instance_id;
    records[i].group = groups[i];
    records[i].q_value =
        q_kind == QKind::Accuracy
            ? static_cast<double>(lime::agreement(expls[i]))
            : std::abs(expls[i].blackbox_prob - expls[i].surrogate_prob_at_instance);
  }
  return records;
}

std::pair<double, double> trial_ci(const std::vector<double>& values, double level) {
  if (values.size() < 2)
    throw SamplingError("confidence interval needs at least 2 trials");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("level must be in (0,1)");
  const double m = stats::mean(values);
  const double s = stats::sd_sample(values);
  const double nu = static_cast<double>(values.size() - 1);
  const double t = stats::student_t_quantile(0.5 + level / 2.0, nu);
  const double half = t * s / std::sqrt(static_cast<double>(values.size()));
  return {m - half, m + half};
}

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "metric,q_kind,group_or_all,value,ci_low,ci_high\n";
  for (const auto& r : rows)
    out << r.metric << ',' << r.q_kind << ',' << r.group_or_all << ','
        << format_double(r.value) << ',' << format_double(r.ci_low) << ','
        << format_double(r.ci_high) << '\n';
}

}  // namespace xdaudit::metrics
