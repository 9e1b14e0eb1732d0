#include "unmix/kernels.hpp"

#include <cmath>

// Reference kernels. Plain loops, one accumulator, fixed left-to-right
// order: these define the semantics the vector variants are tested against.

namespace unmix::kernels::detail {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double nrm2sq_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double asum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::fabs(x[i]);
  return acc;
}

double sqdist_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scal_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void mul_ratio_scalar(double* a, const double* num, const double* den,
                      double floor, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) a[i] *= num[i] / (den[i] + floor);
}

extern const Ops scalar_ops;
const Ops scalar_ops = {
    dot_scalar,  nrm2sq_scalar, sum_scalar,  asum_scalar,
    sqdist_scalar, axpy_scalar, scal_scalar, mul_ratio_scalar,
};

}  // namespace unmix::kernels::detail

namespace unmix::kernels {

const Ops& scalar() { return detail::scalar_ops; }

}  // namespace unmix::kernels
