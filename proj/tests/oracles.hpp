#pragma once

// Test-only reference implementations, written independently of the library
// code paths they check. Everything here favors obviousness over speed.

#include <cstddef>
#include <functional>
#include <vector>

#include "unmix/matrix.hpp"

namespace oracles {

// Triple-loop matrix product.
unmix::Matrix naive_matmul(const unmix::Matrix& a, const unmix::Matrix& b);

// Euclidean projection onto the probability simplex by enumerating every
// support pattern and checking the KKT conditions. Exponential in c.
std::vector<double> simplex_projection_qp(const std::vector<double>& v);

// Best abundance for min ||y - A s||^2 on the simplex, by enumerating
// support patterns and solving the equality-constrained system on each.
std::vector<double> simplex_least_squares_qp(const unmix::Matrix& a,
                                             const std::vector<double>& y);

// Central finite differences of f at x.
std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h);

// Minimum-total-cost assignment by trying all permutations.
std::vector<std::size_t> brute_force_assignment(const unmix::Matrix& cost,
                                                double* total = nullptr);

// Direct transcriptions of the sparsity-weight and local-cost formulas.
double lambda_formula(const unmix::Matrix& y);
double local_cost_formula(const unmix::Matrix& a, const std::vector<double>& y,
                          const std::vector<double>& s,
                          const std::vector<std::vector<double>>& neighbor_s,
                          const std::vector<double>& rho, double eta,
                          double lambda, double q);

}  // namespace oracles
