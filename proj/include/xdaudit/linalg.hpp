#pragma once

#include <cstddef>
#include <vector>

namespace xdaudit {

// Dense row-major matrix of doubles. Deliberately minimal: the models in
// this project only need products, transposed products and a handful of
// small symmetric solves.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

// out = a * b. Accumulates row-wise (ikj order) so the inner loop runs over
// contiguous memory and vectorizes.
void matmul(const Matrix& a, const Matrix& b, Matrix& out);

// out = a^T * b, with a (n x k), b (n x m), out (k x m).
void matmul_at_b(const Matrix& a, const Matrix& b, Matrix& out);

// out = a * b^T, with a (n x m), b (k x m), out (n x k).
void matmul_a_bt(const Matrix& a, const Matrix& b, Matrix& out);

// Solves the symmetric positive (semi)definite system A x = b in place via
// Gaussian elimination with partial pivoting. Returns false when A is
// numerically singular (no solution written).
bool solve_symmetric(Matrix a, std::vector<double> b, std::vector<double>& x);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns eigenvalues; `vectors` columns are the corresponding eigenvectors.
std::vector<double> jacobi_eigen(const Matrix& a, Matrix& vectors);

// Minimum-norm solution of A x = b for symmetric A via the eigendecomposition
// pseudoinverse (eigenvalues below tol * max|eig| are treated as zero).
std::vector<double> pinv_solve_symmetric(const Matrix& a,
                                         const std::vector<double>& b,
                                         double tol = 1e-12);

}  // namespace xdaudit
