#include "unmix/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "unmix/errors.hpp"
#include "unmix/kernels.hpp"

namespace unmix::metrics {

namespace {

constexpr double kClampTol = 1e-12;

double angle(const double* a, const double* b, std::size_t len) {
  const auto& k = kernels::active();
  const double na = k.nrm2sq(a, len);
  const double nb = k.nrm2sq(b, len);
  if (na == 0.0 || nb == 0.0) {
    throw NumericError("angle: zero vector");
  }
  double c = k.dot(a, b, len) / std::sqrt(na * nb);
  // Rounding can push the cosine marginally outside [-1, 1].
  if (c > 1.0) {
    if (c > 1.0 + kClampTol) throw NumericError("angle: cosine out of range");
    c = 1.0;
  } else if (c < -1.0) {
    if (c < -1.0 - kClampTol) throw NumericError("angle: cosine out of range");
    c = -1.0;
  }
  return std::acos(c);
}

}  // namespace

double sad(const double* a, const double* a_hat, std::size_t len) {
  return angle(a, a_hat, len);
}

double sad(const std::vector<double>& a, const std::vector<double>& a_hat) {
  if (a.size() != a_hat.size()) throw ShapeError("sad: lengths differ");
  return angle(a.data(), a_hat.data(), a.size());
}

double aad(const double* s, const double* s_hat, std::size_t len) {
  return angle(s, s_hat, len);
}

double aad(const std::vector<double>& s, const std::vector<double>& s_hat) {
  if (s.size() != s_hat.size()) throw ShapeError("aad: lengths differ");
  return angle(s.data(), s_hat.data(), s.size());
}

double reconstruction_error(const Matrix& y, const Matrix& y_hat) {
  if (!y.same_shape(y_hat)) throw ShapeError("reconstruction_error: shapes differ");
  const auto& k = kernels::active();
  double total = 0.0;
  for (std::size_t i = 0; i < y.cols(); ++i) {
    total += std::sqrt(k.sqdist(y.col(i), y_hat.col(i), y.rows()));
  }
  return total / static_cast<double>(y.cols());
}

double rms_aggregate(const std::vector<double>& values) {
  if (values.empty()) throw ArgumentError("rms_aggregate: empty list");
  double acc = 0.0;
  for (const double v : values) acc += v * v;
  return std::sqrt(acc / static_cast<double>(values.size()));
}

Matching match_endmembers(const Matrix& a_true, const Matrix& a_hat) {
  if (!a_true.same_shape(a_hat)) {
    throw ShapeError("match_endmembers: signature shapes differ");
  }
  const std::size_t c = a_true.cols();
  if (c > 20) {
    throw ArgumentError("match_endmembers: more than 20 endmembers unsupported");
  }

  Matrix cost(c, c);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      cost(i, j) = sad(a_hat.col(i), a_true.col(j), a_true.rows());
    }
  }

  // Exact min-cost assignment by DP over subsets of true indices.
  // suffix[mask] = least cost of assigning estimates popcount(mask)..c-1 to
  // the true indices outside mask. Estimates are then matched in index
  // order, taking the lowest true index that stays on an optimal path, which
  // yields the lexicographically smallest optimal permutation (the same
  // assignment a Hungarian solver with that tie rule returns).
  const std::size_t full = (std::size_t{1} << c) - 1;
  std::vector<double> suffix(full + 1, std::numeric_limits<double>::infinity());
  suffix[full] = 0.0;
  for (std::size_t mm = full; mm-- > 0;) {
    const std::size_t i = static_cast<std::size_t>(__builtin_popcountll(mm));
    for (std::size_t j = 0; j < c; ++j) {
      if (mm & (std::size_t{1} << j)) continue;
      const double cand = cost(i, j) + suffix[mm | (std::size_t{1} << j)];
      if (cand < suffix[mm]) suffix[mm] = cand;
    }
  }

  Matching m;
  m.permutation.resize(c);
  m.matched_sad.resize(c);
  m.total_sad = suffix[0];
  const double eps = 1e-15;
  std::size_t mask = 0;
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      if (mask & (std::size_t{1} << j)) continue;
      const std::size_t with_j = mask | (std::size_t{1} << j);
      if (cost(i, j) + suffix[with_j] <= suffix[mask] + eps) {
        m.permutation[i] = j;
        m.matched_sad[i] = cost(i, j);
        mask = with_j;
        break;
      }
    }
  }
  return m;
}

EvalReport evaluate(const Matrix& a_true, const Matrix& s_true,
                    const Matrix& a_hat, const Matrix& s_hat, const Matrix& y) {
  if (s_true.cols() != s_hat.cols()) {
    throw ShapeError("evaluate: abundance pixel counts differ");
  }
  EvalReport rep;
  const Matching m = match_endmembers(a_true, a_hat);
  rep.matching = m.permutation;
  rep.per_endmember_sad = m.matched_sad;
  rep.rms_sad = rms_aggregate(m.matched_sad);

  // Reorder estimated abundances into true-endmember order for AAD.
  Matrix s_aligned(s_true.rows(), s_true.cols());
  for (std::size_t i = 0; i < m.permutation.size(); ++i) {
    const std::size_t j = m.permutation[i];
    for (std::size_t k = 0; k < s_hat.cols(); ++k) {
      s_aligned(j, k) = s_hat(i, k);
    }
  }
  std::vector<double> aads(s_true.cols());
  double mean = 0.0;
  for (std::size_t k = 0; k < s_true.cols(); ++k) {
    aads[k] = aad(s_true.col(k), s_aligned.col(k), s_true.rows());
    mean += aads[k];
  }
  rep.mean_aad = mean / static_cast<double>(aads.size());
  rep.rms_aad = rms_aggregate(aads);

  rep.re = reconstruction_error(y, linalg::matmul(a_hat, s_hat));
  return rep;
}

}  // namespace unmix::metrics
