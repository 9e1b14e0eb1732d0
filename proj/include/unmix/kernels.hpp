#pragma once

#include <cstddef>
#include <string>

namespace unmix::kernels {

// Dense double-precision primitives behind the whole library. Each entry has
// a scalar reference implementation and, where the hardware supports it, an
// AVX2/FMA or NEON variant selected once at startup. A given table entry is
// internally order-fixed, so results are reproducible run to run on the same
// machine; scalar and vector variants may differ in the last ulps (different
// reduction trees), which the equivalence tests bound.
struct Ops {
  // sum_i x[i]*y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum_i x[i]^2
  double (*nrm2sq)(const double* x, std::size_t n);
  // sum_i x[i]
  double (*sum)(const double* x, std::size_t n);
  // sum_i |x[i]|
  double (*asum)(const double* x, std::size_t n);
  // sum_i (x[i]-y[i])^2
  double (*sqdist)(const double* x, const double* y, std::size_t n);
  // y[i] += a*x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // x[i] *= a
  void (*scal)(double a, double* x, std::size_t n);
  // a[i] *= num[i] / (den[i] + floor)   (multiplicative NMF update)
  void (*mul_ratio)(double* a, const double* num, const double* den,
                    double floor, std::size_t n);
};

enum class Isa { scalar, avx2, neon };

// Table in use (set once at startup from CPU detection, overridable).
const Ops& active();
// Scalar reference table, always available; the oracle side of the
// kernel equivalence tests.
const Ops& scalar();

Isa active_isa();
std::string isa_name(Isa isa);

// Force a table (tests, or UNMIX_KERNELS=scalar|avx2|neon in the
// environment). Throws ArgumentError if the requested ISA is not
// available on this machine.
void force(Isa isa);
void reset_to_default();

}  // namespace unmix::kernels
