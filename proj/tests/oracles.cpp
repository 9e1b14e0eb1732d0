#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace oracles {

using unmix::Matrix;

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

std::vector<double> simplex_projection_qp(const std::vector<double>& v) {
  const std::size_t c = v.size();
  std::vector<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  // Support pattern = set of coordinates allowed to be positive. On a
  // support S the minimizer of ||x - v||^2 with sum x = 1 is
  // x_i = v_i - tau, tau = (sum_S v - 1)/|S|. Feasible + KKT
  // (v_i - tau <= 0 off the support) identifies the projection; the
  // minimum-distance feasible candidate is kept as a safety net.
  for (std::size_t mask = 1; mask < (std::size_t{1} << c); ++mask) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < c; ++i) {
      if (mask & (std::size_t{1} << i)) {
        sum += v[i];
        ++count;
      }
    }
    const double tau = (sum - 1.0) / static_cast<double>(count);
    std::vector<double> x(c, 0.0);
    bool feasible = true;
    for (std::size_t i = 0; i < c; ++i) {
      if (mask & (std::size_t{1} << i)) {
        x[i] = v[i] - tau;
        if (x[i] < -1e-15) feasible = false;
      }
    }
    if (!feasible) continue;
    double dist = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
      const double d = x[i] - v[i];
      dist += d * d;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

std::vector<double> simplex_least_squares_qp(const Matrix& a,
                                             const std::vector<double>& y) {
  const std::size_t c = a.cols();
  const std::size_t rows = a.rows();
  std::vector<double> best;
  double best_obj = std::numeric_limits<double>::infinity();

  for (std::size_t mask = 1; mask < (std::size_t{1} << c); ++mask) {
    std::vector<std::size_t> sup;
    for (std::size_t i = 0; i < c; ++i) {
      if (mask & (std::size_t{1} << i)) sup.push_back(i);
    }
    const std::size_t m = sup.size();
    // KKT system of min ||y - A_S s||^2 s.t. 1^T s = 1:
    // [2 A_S^T A_S  1; 1^T 0] [s; nu] = [2 A_S^T y; 1]
    const std::size_t dim = m + 1;
    std::vector<std::vector<double>> k(dim, std::vector<double>(dim + 1, 0.0));
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double g = 0.0;
        for (std::size_t r = 0; r < rows; ++r) g += a(r, sup[i]) * a(r, sup[j]);
        k[i][j] = 2.0 * g;
      }
      k[i][m] = 1.0;
      k[m][i] = 1.0;
      double b = 0.0;
      for (std::size_t r = 0; r < rows; ++r) b += a(r, sup[i]) * y[r];
      k[i][dim] = 2.0 * b;
    }
    k[m][dim] = 1.0;

    // Gaussian elimination with partial pivoting.
    bool singular = false;
    for (std::size_t col = 0; col < dim; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < dim; ++r) {
        if (std::fabs(k[r][col]) > std::fabs(k[piv][col])) piv = r;
      }
      if (std::fabs(k[piv][col]) < 1e-12) {
        singular = true;
        break;
      }
      std::swap(k[col], k[piv]);
      for (std::size_t r = 0; r < dim; ++r) {
        if (r == col) continue;
        const double f = k[r][col] / k[col][col];
        for (std::size_t cc = col; cc <= dim; ++cc) k[r][cc] -= f * k[col][cc];
      }
    }
    if (singular) continue;

    std::vector<double> s(c, 0.0);
    bool feasible = true;
    for (std::size_t i = 0; i < m; ++i) {
      s[sup[i]] = k[i][dim] / k[i][i];
      if (s[sup[i]] < -1e-12) feasible = false;
    }
    if (!feasible) continue;

    double obj = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      double resid = y[r];
      for (std::size_t i = 0; i < c; ++i) resid -= a(r, i) * s[i];
      obj += resid * resid;
    }
    if (obj < best_obj) {
      best_obj = obj;
      best = s;
    }
  }
  return best;
}

std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

std::vector<std::size_t> brute_force_assignment(const Matrix& cost,
                                                double* total) {
  const std::size_t c = cost.rows();
  std::vector<std::size_t> perm(c);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double acc = 0.0;
    for (std::size_t i = 0; i < c; ++i) acc += cost(i, perm[i]);
    if (acc < best_cost - 1e-15) {
      best_cost = acc;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (total) *total = best_cost;
  return best;
}

double lambda_formula(const Matrix& y) {
  const std::size_t bands = y.rows();
  const std::size_t n = y.cols();
  double acc = 0.0;
  for (std::size_t l = 0; l < bands; ++l) {
    double l1 = 0.0, l2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      l1 += std::fabs(y(l, k));
      l2 += y(l, k) * y(l, k);
    }
    l2 = std::sqrt(l2);
    if (l2 == 0.0) continue;
    acc += (std::sqrt(static_cast<double>(n)) - l1 / l2) /
           std::sqrt(static_cast<double>(n - 1));
  }
  return acc / std::sqrt(static_cast<double>(bands));
}

double local_cost_formula(const Matrix& a, const std::vector<double>& y,
                          const std::vector<double>& s,
                          const std::vector<std::vector<double>>& neighbor_s,
                          const std::vector<double>& rho, double eta,
                          double lambda, double q) {
  double data = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double resid = y[r];
    for (std::size_t i = 0; i < a.cols(); ++i) resid -= a(r, i) * s[i];
    data += resid * resid;
  }
  double nb = 0.0;
  for (std::size_t j = 0; j < neighbor_s.size(); ++j) {
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double diff = s[i] - neighbor_s[j][i];
      d += diff * diff;
    }
    nb += rho[j] * d;
  }
  double lq = 0.0;
  for (const double v : s) lq += std::pow(std::fabs(v), q);
  lq = std::pow(lq, 1.0 / q);
  return data + eta * nb + lambda * lq;
}

}  // namespace oracles
