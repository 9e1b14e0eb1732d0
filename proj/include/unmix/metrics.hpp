#pragma once

#include <string>
#include <vector>

#include "unmix/core.hpp"

namespace unmix::metrics {

// Spectral angle between two spectra, radians in [0, pi]. Scale invariant.
double sad(const double* a, const double* a_hat, std::size_t len);
double sad(const std::vector<double>& a, const std::vector<double>& a_hat);

// Abundance angle between two abundance columns; same formula as sad.
double aad(const double* s, const double* s_hat, std::size_t len);
double aad(const std::vector<double>& s, const std::vector<double>& s_hat);

// Mean over pixels of the per-pixel Euclidean residual ||y_i - y_hat_i||.
double reconstruction_error(const Matrix& y, const Matrix& y_hat);

// sqrt(mean of squares); throws ArgumentError on an empty list.
double rms_aggregate(const std::vector<double>& values);

struct Matching {
  // permutation[j] = index of the true endmember assigned to estimate j
  std::vector<std::size_t> permutation;
  std::vector<double> matched_sad;  // SAD of estimate j vs its match
  double total_sad = 0.0;
};

// Minimum-total-SAD bijection between estimated and true endmember columns
// (the assignment a Hungarian solver would return); ties broken
// lexicographically in the permutation.
Matching match_endmembers(const Matrix& a_true, const Matrix& a_hat);

struct EvalReport {
  std::vector<double> per_endmember_sad;  // ordered by estimate index
  std::vector<std::size_t> matching;      // estimate -> true index
  double rms_sad = 0.0;
  double mean_aad = 0.0;
  double rms_aad = 0.0;
  double re = 0.0;
};

// Full evaluation of an estimate against ground truth: endmember matching,
// per-endmember SAD, per-pixel AAD aggregates, reconstruction error.
EvalReport evaluate(const Matrix& a_true, const Matrix& s_true,
                    const Matrix& a_hat, const Matrix& s_hat, const Matrix& y);

}  // namespace unmix::metrics
