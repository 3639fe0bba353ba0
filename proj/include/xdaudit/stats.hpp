#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace xdaudit::stats {

double mean(std::span<const double> v);

// Population standard deviation (divide by n).
double sd_population(std::span<const double> v);

// Sample standard deviation (divide by n - 1).
double sd_sample(std::span<const double> v);

// Linear-interpolation empirical quantile (R type 7), q in [0, 1].
double quantile(std::vector<double> values, double q);

// Standard normal CDF.
double normal_cdf(double z);

// Two-sided p-value for a standard normal statistic.
double normal_two_sided_p(double z);

// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Student-t CDF with nu degrees of freedom.
double student_t_cdf(double t, double nu);

// Quantile of the Student-t distribution (bisection on the CDF).
double student_t_quantile(double p, double nu);

}  // namespace xdaudit::stats
