#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace unmix {

// Dense column-major matrix. Column-major so that per-pixel columns of the
// L x N data and c x N abundance matrices are contiguous for the kernels.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::size_t rows, std::size_t cols,
                          const std::vector<double>& row_major);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

  double* col(std::size_t c) { return data_.data() + c * rows_; }
  const double* col(std::size_t c) const { return data_.data() + c * rows_; }
  std::span<double> col_span(std::size_t c) { return {col(c), rows_}; }
  std::span<const double> col_span(std::size_t c) const { return {col(c), rows_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Matrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace linalg {

// out = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// out = A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// out = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);

double frobenius_sq(const Matrix& a);
double frobenius_dist_sq(const Matrix& a, const Matrix& b);

// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns eigenvalues in descending order with matching eigenvector columns.
struct SymEig {
  std::vector<double> values;
  Matrix vectors;  // column j is the eigenvector for values[j]
};
SymEig sym_eig(const Matrix& a);

// Solve A x = b for symmetric positive definite A (Cholesky). Throws
// NumericError when A is not positive definite.
std::vector<double> solve_spd(const Matrix& a, const std::vector<double>& b);

}  // namespace linalg

}  // namespace unmix
