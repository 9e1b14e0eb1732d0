#include "unmix/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "unmix/errors.hpp"
#include "unmix/kernels.hpp"

namespace unmix {

Matrix Matrix::from_rows(std::size_t rows, std::size_t cols,
                         const std::vector<double>& row_major) {
  if (row_major.size() != rows * cols) {
    throw ShapeError("from_rows: initializer has wrong length");
  }
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row_major[r * cols + c];
  }
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t c = 0; c < cols_; ++c) {
    for (std::size_t r = 0; r < rows_; ++r) t(c, r) = (*this)(r, c);
  }
  return t;
}

namespace linalg {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  // Column of the result is a linear combination of columns of a; each
  // axpy runs down a contiguous column.
  const auto& k = kernels::active();
  for (std::size_t j = 0; j < b.cols(); ++j) {
    double* oj = out.col(j);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      k.axpy(b(i, j), a.col(i), oj, a.rows());
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_nt: column counts differ");
  Matrix out(a.rows(), b.rows());
  const auto& k = kernels::active();
  // Sum of rank-1 contributions a.col(j) * b.col(j)^T.
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double* aj = a.col(j);
    for (std::size_t r = 0; r < b.rows(); ++r) {
      k.axpy(b(r, j), aj, out.col(r), a.rows());
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("matmul_tn: row counts differ");
  Matrix out(a.cols(), b.cols());
  const auto& k = kernels::active();
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      out(i, j) = k.dot(a.col(i), b.col(j), a.rows());
    }
  }
  return out;
}

double frobenius_sq(const Matrix& a) {
  return kernels::active().nrm2sq(a.data(), a.size());
}

double frobenius_dist_sq(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeError("frobenius_dist_sq: shapes differ");
  return kernels::active().sqdist(a.data(), b.data(), a.size());
}

SymEig sym_eig(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("sym_eig: matrix not square");
  const std::size_t n = a.rows();
  Matrix m = a;
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  // Cyclic Jacobi sweeps until off-diagonal mass is negligible.
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
    }
    if (off < 1e-26 * (1.0 + frobenius_sq(m))) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double app = m(p, p);
        const double aqq = m(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0)
                             ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                             : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double mip = m(i, p);
          const double miq = m(i, q);
          m(i, p) = c * mip - s * miq;
          m(i, q) = s * mip + c * miq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double mpi = m(p, i);
          const double mqi = m(q, i);
          m(p, i) = c * mpi - s * mqi;
          m(q, i) = s * mpi + c * mqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return m(i, i) > m(j, j);
  });

  SymEig out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = m(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

std::vector<double> solve_spd(const Matrix& a, const std::vector<double>& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw ShapeError("solve_spd: dimension mismatch");
  }
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = j; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (s <= 0.0) throw NumericError("solve_spd: matrix not positive definite");
        l(j, j) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  std::vector<double> y(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

}  // namespace linalg

}  // namespace unmix
