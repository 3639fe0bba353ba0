#pragma once

// Independent verification oracles. Everything here recomputes results by
// naive enumeration or explicit matrix inversion, deliberately sharing no
// code with the implementations it checks. Used by the test suites and the
// `xdaudit test-oracles` command.

#include <cmath>
#include <cstddef>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "xdaudit/linalg.hpp"
#include "xdaudit/metrics.hpp"

namespace xdaudit::oracles {

// Both gap metrics by naive enumeration over (group, pair) combinations.
inline std::pair<double, double> brute_force_gap_oracle(
    const std::vector<metrics::FidelityRecord>& records) {
  std::map<int, std::vector<double>> by_group;
  for (const auto& r : records) by_group[r.group].push_back(r.q_value);

  double total = 0.0;
  std::size_t n = 0;
  for (const auto& [g, values] : by_group)
    for (double v : values) {
      total += v;
      ++n;
    }
  const double overall = total / static_cast<double>(n);

  std::vector<double> means;
  for (const auto& [g, values] : by_group) {
    double acc = 0.0;
    for (double v : values) acc += v;
    means.push_back(acc / static_cast<double>(values.size()));
  }

  double max_gap = -1e300;
  for (double m : means) max_gap = std::max(max_gap, overall - m);

  double pair_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t p = 0; p < means.size(); ++p)
    for (std::size_t j = p + 1; j < means.size(); ++j) {
      pair_sum += std::abs(means[p] - means[j]);
      ++pairs;
    }
  const double mean_gap = pairs == 0 ? 0.0 : pair_sum / static_cast<double>(pairs);
  return {max_gap, mean_gap};
}

// Weighted least squares with ridge on the coefficients via an explicit
// Gauss-Jordan inverse of the (d+1)x(d+1) normal matrix. Returns
// (coefficients, intercept).
inline std::pair<std::vector<double>, double> wls_explicit_inverse(
    const Matrix& x, const std::vector<double>& y, const std::vector<double>& w,
    double ridge_lambda) {
  const std::size_t n = x.rows(), d = x.cols(), m = d + 1;

  // Normal matrix and right-hand side with the intercept appended last.
  std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
  std::vector<double> rhs(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(m);
    for (std::size_t j = 0; j < d; ++j) row[j] = x(i, j);
    row[d] = 1.0;
    for (std::size_t p = 0; p < m; ++p) {
      for (std::size_t q = 0; q < m; ++q) a[p][q] += w[i] * row[p] * row[q];
      rhs[p] += w[i] * row[p] * y[i];
    }
  }
  for (std::size_t j = 0; j < d; ++j) a[j][j] += ridge_lambda;

  // Gauss-Jordan inverse.
  std::vector<std::vector<double>> inv(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < m; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == 0.0) throw std::runtime_error("oracle: singular system");
    std::swap(a[pivot], a[col]);
    std::swap(inv[pivot], inv[col]);
    const double piv = a[col][col];
    for (std::size_t q = 0; q < m; ++q) {
      a[col][q] /= piv;
      inv[col][q] /= piv;
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      const double f = a[r][col];
      for (std::size_t q = 0; q < m; ++q) {
        a[r][q] -= f * a[col][q];
        inv[r][q] -= f * inv[col][q];
      }
    }
  }

  std::vector<double> beta(m, 0.0);
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q) beta[p] += inv[p][q] * rhs[q];
  std::vector<double> coeffs(beta.begin(), beta.begin() + d);
  return {coeffs, beta[d]};
}

}  // namespace xdaudit::oracles
