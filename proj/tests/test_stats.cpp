#include "xdaudit/stats.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "xdaudit/linalg.hpp"
#include "xdaudit/rng.hpp"

namespace stats = xdaudit::stats;
using xdaudit::Matrix;

TEST_CASE("moments") {
  std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  CHECK(stats::mean(v) == doctest::Approx(2.5));
  CHECK(stats::sd_population(v) == doctest::Approx(std::sqrt(1.25)));
  CHECK(stats::sd_sample(v) == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("quantile matches linear interpolation") {
  std::vector<double> v = {4.0, 1.0, 3.0, 2.0};
  CHECK(stats::quantile(v, 0.0) == doctest::Approx(1.0));
  CHECK(stats::quantile(v, 1.0) == doctest::Approx(4.0));
  CHECK(stats::quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(stats::quantile(v, 1.0 / 3.0) == doctest::Approx(2.0));
}

TEST_CASE("normal CDF reference values") {
  CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(stats::normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-6));
  CHECK(stats::normal_cdf(-1.0) == doctest::Approx(0.1586552539).epsilon(1e-6));
  CHECK(stats::normal_two_sided_p(1.959963985) == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("student t quantiles against table values") {
  // Two-sided 95% critical values.
  CHECK(stats::student_t_quantile(0.975, 1) == doctest::Approx(12.706).epsilon(1e-3));
  CHECK(stats::student_t_quantile(0.975, 4) == doctest::Approx(2.776).epsilon(1e-3));
  CHECK(stats::student_t_quantile(0.975, 10) == doctest::Approx(2.228).epsilon(1e-3));
  CHECK(stats::student_t_quantile(0.975, 100) == doctest::Approx(1.984).epsilon(1e-3));
  CHECK(std::abs(stats::student_t_quantile(0.5, 7)) < 1e-6);
}

TEST_CASE("t CDF is symmetric and sane") {
  CHECK(stats::student_t_cdf(0.0, 5) == doctest::Approx(0.5));
  CHECK(stats::student_t_cdf(2.0, 5) + stats::student_t_cdf(-2.0, 5) ==
        doctest::Approx(1.0));
}

TEST_CASE("solve_symmetric solves a known system") {
  Matrix a(2, 2);
  a(0, 0) = 4.0;
  a(0, 1) = 1.0;
  a(1, 0) = 1.0;
  a(1, 1) = 3.0;
  std::vector<double> b = {1.0, 2.0}, x;
  REQUIRE(xdaudit::solve_symmetric(a, b, x));
  CHECK(4.0 * x[0] + 1.0 * x[1] == doctest::Approx(1.0));
  CHECK(1.0 * x[0] + 3.0 * x[1] == doctest::Approx(2.0));
}

TEST_CASE("solve_symmetric reports singular systems") {
  Matrix a(2, 2);
  a(0, 0) = 1.0;
  a(0, 1) = 1.0;
  a(1, 0) = 1.0;
  a(1, 1) = 1.0;
  std::vector<double> b = {1.0, 1.0}, x;
  CHECK_FALSE(xdaudit::solve_symmetric(a, b, x));
}

TEST_CASE("jacobi eigendecomposition reconstructs the matrix") {
  xdaudit::Rng rng(3);
  Matrix m(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i; j < 4; ++j) m(i, j) = m(j, i) = rng.normal();
  Matrix v;
  const auto eig = xdaudit::jacobi_eigen(m, v);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 4; ++k) acc += v(i, k) * eig[k] * v(j, k);
      CHECK(acc == doctest::Approx(m(i, j)).epsilon(1e-9));
    }
  }
}

TEST_CASE("pinv_solve_symmetric gives minimum-norm solution on singular system") {
  Matrix a(2, 2);
  a(0, 0) = 2.0;
  a(0, 1) = 2.0;
  a(1, 0) = 2.0;
  a(1, 1) = 2.0;
  std::vector<double> b = {2.0, 2.0};
  const auto x = xdaudit::pinv_solve_symmetric(a, b);
  CHECK(x[0] == doctest::Approx(0.5));
  CHECK(x[1] == doctest::Approx(0.5));
}

TEST_CASE("matmul variants agree with naive triple loop") {
  xdaudit::Rng rng(8);
  Matrix a(7, 5), b(5, 6);
  for (double& v : a.data()) v = rng.normal();
  for (double& v : b.data()) v = rng.normal();
  Matrix c;
  xdaudit::matmul(a, b, c);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 5; ++k) acc += a(i, k) * b(k, j);
      CHECK(c(i, j) == doctest::Approx(acc).epsilon(1e-12));
    }

  Matrix atb;
  xdaudit::matmul_at_b(a, a, atb);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 7; ++k) acc += a(k, i) * a(k, j);
      CHECK(atb(i, j) == doctest::Approx(acc).epsilon(1e-12));
    }

  Matrix abt;
  xdaudit::matmul_a_bt(b, b, abt);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 6; ++k) acc += b(i, k) * b(j, k);
      CHECK(abt(i, j) == doctest::Approx(acc).epsilon(1e-12));
    }
}
