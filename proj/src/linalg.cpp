#include "xdaudit/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <utility>

namespace xdaudit {

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.cols() == b.rows());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  out = Matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double aik = arow[kk];
      const double* brow = b.row(kk);
      for (std::size_t j = 0; j < m; ++j) orow[j] += aik * brow[j];
    }
  }
}

void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.rows() == b.rows());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  out = Matrix(k, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.row(i);
    const double* brow = b.row(i);
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double aik = arow[kk];
      double* orow = out.row(kk);
      for (std::size_t j = 0; j < m; ++j) orow[j] += aik * brow[j];
    }
  }
}

void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out) {
  assert(a.cols() == b.cols());
  const std::size_t n = a.rows(), m = a.cols(), k = b.rows();
  out = Matrix(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.row(i);
    double* orow = out.row(i);
    for (std::size_t j = 0; j < k; ++j) {
      const double* brow = b.row(j);
      double acc = 0.0;
      for (std::size_t kk = 0; kk < m; ++kk) acc += arow[kk] * brow[kk];
      orow[j] = acc;
    }
  }
}

bool solve_symmetric(Matrix a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = a.rows();
  assert(a.cols() == n && b.size() == n);

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
  if (scale == 0.0) return false;
  const double tiny = scale * 1e-13 * static_cast<double>(n);

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (std::abs(a(pivot, col)) <= tiny) return false;
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(pivot, j), a(col, j));
      std::swap(b[pivot], b[col]);
    }
    const double inv = 1.0 / a(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) * inv;
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t j = i + 1; j < n; ++j) acc -= a(i, j) * x[j];
    x[i] = acc / a(i, i);
  }
  return true;
}

std::vector<double> jacobi_eigen(const Matrix& a_in, Matrix& vectors) {
  const std::size_t n = a_in.rows();
  Matrix a = a_in;
  vectors = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) vectors(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj - s * aqj;
          a(q, j) = s * apj + c * aqj;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = vectors(i, p), viq = vectors(i, q);
          vectors(i, p) = c * vip - s * viq;
          vectors(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  return eig;
}

std::vector<double> pinv_solve_symmetric(const Matrix& a,
                                         const std::vector<double>& b,
                                         double tol) {
  const std::size_t n = a.rows();
  Matrix v;
  std::vector<double> eig = jacobi_eigen(a, v);
  double max_abs = 0.0;
  for (double e : eig) max_abs = std::max(max_abs, std::abs(e));
  const double cutoff = max_abs * tol;

  // x = V diag(1/eig) V^T b, zeroing near-null directions.
  std::vector<double> vtb(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) vtb[j] += v(i, j) * b[i];
  std::vector<double> x(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(eig[j]) <= cutoff) continue;
    const double coeff = vtb[j] / eig[j];
    for (std::size_t i = 0; i < n; ++i) x[i] += coeff * v(i, j);
  }
  return x;
}

}  // namespace xdaudit
