// NEON kernel variants for aarch64, 2 doubles per lane. Same structure as
// the AVX2 file; selected by the dispatcher on ARM builds.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstddef>

#include "unmix/kernels.hpp"

namespace unmix::kernels::detail {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  for (; i + 2 <= n; i += 2) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double nrm2sq_neon(const double* x, std::size_t n) { return dot_neon(x, x, n); }

double sum_neon(const double* x, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc0 = vaddq_f64(acc0, vld1q_f64(x + i));
  double acc = vaddvq_f64(acc0);
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double asum_neon(const double* x, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc0 = vaddq_f64(acc0, vabsq_f64(vld1q_f64(x + i)));
  double acc = vaddvq_f64(acc0);
  for (; i < n; ++i) acc += std::fabs(x[i]);
  return acc;
}

double sqdist_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    acc0 = vfmaq_f64(acc0, d, d);
  }
  double acc = vaddvq_f64(acc0);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scal_neon(double a, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

void mul_ratio_neon(double* a, const double* num, const double* den,
                    double floor, std::size_t n) {
  const float64x2_t vf = vdupq_n_f64(floor);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t r =
        vdivq_f64(vld1q_f64(num + i), vaddq_f64(vld1q_f64(den + i), vf));
    vst1q_f64(a + i, vmulq_f64(vld1q_f64(a + i), r));
  }
  for (; i < n; ++i) a[i] *= num[i] / (den[i] + floor);
}

extern const Ops neon_ops;
const Ops neon_ops = {
    dot_neon,  nrm2sq_neon, sum_neon,  asum_neon,
    sqdist_neon, axpy_neon, scal_neon, mul_ratio_neon,
};

}  // namespace unmix::kernels::detail

#endif  // __aarch64__
