#pragma once

#include <cstdint>
#include <utility>

#include "unmix/core.hpp"

namespace unmix::init {

// Vertex component analysis: extracts c endmember candidates by repeated
// orthogonal projections onto directions orthogonal to the simplex spanned
// so far. Deterministic given the seed. Throws NumericError when the data
// subspace has dimension < c.
SignatureMatrix vca(const HsiCube& cube, std::size_t count, std::uint64_t seed);

// Fully constrained least squares: per pixel, the abundance minimizing
// ||y - A s||^2 subject to sum-to-one and nonnegativity. Nonnegative least
// squares on a sum-augmented system, then an exact simplex projection.
AbundanceMatrix fcls(const HsiCube& cube, const SignatureMatrix& a,
                     int threads = 1);

// Solve a single pixel; exposed for tests.
std::vector<double> fcls_pixel(const Matrix& a, const double* y);

// A uniform in [0,1]; abundance columns uniform on the simplex.
std::pair<SignatureMatrix, AbundanceMatrix> random_init(std::size_t bands,
                                                        std::size_t count,
                                                        std::size_t pixels,
                                                        std::uint64_t seed);

}  // namespace unmix::init
