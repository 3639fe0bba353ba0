#pragma once

#include <algorithm>

#include "xdaudit/rng.hpp"
#include "xdaudit/stats.hpp"

namespace xdaudit::metrics {

template <typename Statistic>
std::pair<double, double> bootstrap_ci(const std::vector<FidelityRecord>& records,
                                       Statistic statistic, std::size_t n_resamples,
                                       std::uint64_t seed, double level) {
  Rng rng = Rng(seed).stream("bootstrap");
  std::vector<double> stats_values;
  stats_values.reserve(n_resamples);
  std::vector<FidelityRecord> resample(records.size());
  for (std::size_t b = 0; b < n_resamples; ++b) {
    for (std::size_t i = 0; i < records.size(); ++i)
      resample[i] = records[rng.below(records.size())];
    stats_values.push_back(statistic(resample));
  }
  std::sort(stats_values.begin(), stats_values.end());
  const double alpha = (1.0 - level) / 2.0;
  auto pick = [&](double q) {
    const double pos = q * static_cast<double>(stats_values.size() - 1);
    return stats_values[static_cast<std::size_t>(pos + 0.5)];
  };
  return {pick(alpha), pick(1.0 - alpha)};
}

}  // namespace xdaudit::metrics
