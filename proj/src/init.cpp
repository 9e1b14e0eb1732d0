#include "unmix/init.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "unmix/errors.hpp"
#include "unmix/kernels.hpp"
#include "unmix/parallel.hpp"
#include "unmix/rng.hpp"
#include "unmix/solver.hpp"

namespace unmix::init {

namespace {

// Top-d eigenvectors of the (possibly mean-removed) second-moment matrix
// Y Y^T / N. With require_rank set, throws when fewer than d directions
// carry signal; otherwise zero directions are returned as-is (they simply
// contribute no energy).
Matrix subspace_basis(const Matrix& y, std::size_t d, bool require_rank,
                      const char* who) {
  const std::size_t bands = y.rows();
  const double n = static_cast<double>(y.cols());
  Matrix moment = linalg::matmul_nt(y, y);
  kernels::active().scal(1.0 / n, moment.data(), moment.size());
  const auto eig = linalg::sym_eig(moment);
  const double top = std::max(eig.values.front(), 0.0);
  if (require_rank &&
      (top <= 0.0 || eig.values[d - 1] <= 1e-12 * top)) {
    throw NumericError(std::string(who) +
                       ": data subspace dimension is below the requested "
                       "endmember count; try a smaller count");
  }
  Matrix basis(bands, d);
  for (std::size_t j = 0; j < d; ++j) {
    std::copy(eig.vectors.col(j), eig.vectors.col(j) + bands, basis.col(j));
  }
  return basis;
}

}  // namespace

SignatureMatrix vca(const HsiCube& cube, std::size_t count, std::uint64_t seed) {
  const std::size_t bands = cube.bands();
  const std::size_t n = cube.pixels();
  if (count < 1 || count > std::min(bands, n)) {
    throw ArgumentError("vca: endmember count must be in [1, min(bands, pixels)]");
  }
  const auto& ker = kernels::active();
  const Matrix& y = cube.data();

  if (count == 1) {
    // One vertex: the strongest projection onto the first principal
    // direction of the raw data.
    const Matrix basis = subspace_basis(y, 1, true, "vca");
    const Matrix scores = linalg::matmul_tn(basis, y);
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (std::fabs(scores(0, k)) > std::fabs(scores(0, best))) best = k;
    }
    Matrix out(bands, 1);
    bool all_zero = true;
    for (std::size_t b = 0; b < bands; ++b) {
      out(b, 0) = std::max(basis(b, 0) * scores(0, best), 0.0);
      if (out(b, 0) > 0.0) all_zero = false;
    }
    if (all_zero) {
      std::copy(y.col(best), y.col(best) + bands, out.col(0));
    }
    return SignatureMatrix(std::move(out));
  }

  // Mean spectrum and mean-removed data.
  std::vector<double> mean(bands, 0.0);
  for (std::size_t k = 0; k < n; ++k) ker.axpy(1.0, y.col(k), mean.data(), bands);
  ker.scal(1.0 / static_cast<double>(n), mean.data(), bands);
  Matrix centered = y;
  for (std::size_t k = 0; k < n; ++k) {
    ker.axpy(-1.0, mean.data(), centered.col(k), bands);
  }

  // SNR estimate from the energy captured by the c-dimensional principal
  // subspace of the centered data (rank deficiency is fine here, the
  // missing directions carry no energy).
  const Matrix ud_c = subspace_basis(centered, count, false, "vca");
  const Matrix xc = linalg::matmul_tn(ud_c, centered);  // c x N scores
  const double p_y = linalg::frobenius_sq(y) / static_cast<double>(n);
  const double p_x = linalg::frobenius_sq(xc) / static_cast<double>(n) +
                     ker.nrm2sq(mean.data(), bands);
  const double noise_power = p_y - p_x;
  const double cl = static_cast<double>(count) / static_cast<double>(bands);
  double snr_est = std::numeric_limits<double>::infinity();
  if (noise_power > 1e-15 * p_y) {
    snr_est = 10.0 * std::log10(std::max(p_x - cl * p_y, 0.0) / noise_power);
  }
  const double snr_threshold = 15.0 + 10.0 * std::log10(static_cast<double>(count));

  // Projected data Yp (count x N) and the map back to spectra.
  Matrix yp;        // lifted/projected points the maximization runs on
  Matrix scores;    // subspace coordinates of the data
  Matrix basis;     // bands x d back-projection
  bool affine_lift = false;
  if (snr_est > snr_threshold) {
    // High SNR: project onto the top-c subspace of the raw data and scale
    // each point onto the hyperplane x^T u = 1 (projective projection).
    basis = subspace_basis(y, count, true, "vca");
    scores = linalg::matmul_tn(basis, y);
    std::vector<double> u(count, 0.0);
    for (std::size_t k = 0; k < n; ++k) ker.axpy(1.0, scores.col(k), u.data(), count);
    ker.scal(1.0 / static_cast<double>(n), u.data(), count);
    yp = scores;
    for (std::size_t k = 0; k < n; ++k) {
      const double denom = ker.dot(scores.col(k), u.data(), count);
      if (denom != 0.0) ker.scal(1.0 / denom, yp.col(k), count);
    }
  } else {
    // Low SNR: work in the (c-1)-dimensional affine subspace of the
    // centered data and lift with a constant last coordinate.
    affine_lift = true;
    basis = subspace_basis(centered, count - 1, true, "vca");
    scores = linalg::matmul_tn(basis, centered);  // (c-1) x N
    double cval = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      cval = std::max(cval, std::sqrt(ker.nrm2sq(scores.col(k), count - 1)));
    }
    yp = Matrix(count, n);
    for (std::size_t k = 0; k < n; ++k) {
      std::copy(scores.col(k), scores.col(k) + count - 1, yp.col(k));
      yp(count - 1, k) = cval;
    }
  }

  // Iteratively pick the extreme point along a random direction orthogonal
  // to the simplex spanned by the picks so far. The orthonormal set q spans
  // the picked columns (seeded with e_c so the first direction ignores the
  // lifted coordinate).
  Rng rng(seed);
  std::vector<std::size_t> picked(count);
  std::vector<std::vector<double>> q;
  {
    std::vector<double> e_last(count, 0.0);
    e_last[count - 1] = 1.0;
    q.push_back(std::move(e_last));
  }
  std::vector<double> w(count), f(count), proj(n);
  for (std::size_t i = 0; i < count; ++i) {
    double fnorm = 0.0;
    for (int attempt = 0; attempt < 64; ++attempt) {
      for (auto& v : w) v = rng.normal();
      f = w;
      for (const auto& qv : q) {
        const double d = ker.dot(qv.data(), f.data(), count);
        ker.axpy(-d, qv.data(), f.data(), count);
      }
      fnorm = std::sqrt(ker.nrm2sq(f.data(), count));
      if (fnorm > 1e-12) break;
    }
    if (fnorm <= 1e-12) {
      throw NumericError("vca: could not find a direction orthogonal to the "
                         "current simplex; data may be degenerate");
    }
    ker.scal(1.0 / fnorm, f.data(), count);

    for (std::size_t k = 0; k < n; ++k) {
      proj[k] = std::fabs(ker.dot(f.data(), yp.col(k), count));
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (proj[k] > proj[best]) best = k;
    }
    picked[i] = best;

    // Re-orthonormalize over the picked columns (the e_c seed is dropped
    // once a real column exists).
    q.clear();
    for (std::size_t t = 0; t <= i; ++t) {
      std::vector<double> v(yp.col(picked[t]), yp.col(picked[t]) + count);
      for (const auto& qv : q) {
        const double d = ker.dot(qv.data(), v.data(), count);
        ker.axpy(-d, qv.data(), v.data(), count);
      }
      const double norm = std::sqrt(ker.nrm2sq(v.data(), count));
      if (norm > 1e-12) {
        ker.scal(1.0 / norm, v.data(), count);
        q.push_back(std::move(v));
      }
    }
  }

  // Back-project the picked pixels' subspace coordinates to spectra.
  Matrix out(bands, count);
  const std::size_t d = basis.cols();
  for (std::size_t j = 0; j < count; ++j) {
    const double* sc = scores.col(picked[j]);
    double* col = out.col(j);
    for (std::size_t t = 0; t < d; ++t) ker.axpy(sc[t], basis.col(t), col, bands);
    if (affine_lift) ker.axpy(1.0, mean.data(), col, bands);
    bool all_zero = true;
    for (std::size_t b = 0; b < bands; ++b) {
      col[b] = std::max(col[b], 0.0);
      if (col[b] > 0.0) all_zero = false;
    }
    if (all_zero) {
      // Clamping wiped the column; fall back to the observed spectrum.
      std::copy(y.col(picked[j]), y.col(picked[j]) + bands, col);
    }
  }
  return SignatureMatrix(std::move(out));
}

std::vector<double> fcls_pixel(const Matrix& a, const double* y) {
  const std::size_t bands = a.rows();
  const std::size_t c = a.cols();
  const auto& ker = kernels::active();

  // Sum-to-one folded in as an extra heavily weighted row, then
  // nonnegative least squares (Lawson-Hanson active set) on the augmented
  // system, and an exact simplex projection of the result.
  constexpr double kAscWeight = 1e3;

  // Gram matrix and right-hand side of the augmented system:
  // G = A^T A + w^2 11^T, b = A^T y + w^2 1.
  Matrix gram(c, c);
  std::vector<double> rhs(c);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = i; j < c; ++j) {
      const double v = ker.dot(a.col(i), a.col(j), bands) + kAscWeight * kAscWeight;
      gram(i, j) = v;
      gram(j, i) = v;
    }
    rhs[i] = ker.dot(a.col(i), y, bands) + kAscWeight * kAscWeight;
  }

  std::vector<bool> passive(c, false);
  std::vector<double> x(c, 0.0);
  std::vector<double> grad(c);

  const std::size_t max_outer = 3 * c + 10;
  for (std::size_t outer = 0; outer < max_outer; ++outer) {
    // grad = b - G x (gradient of the augmented least squares at x).
    for (std::size_t i = 0; i < c; ++i) {
      double g = rhs[i];
      for (std::size_t j = 0; j < c; ++j) g -= gram(i, j) * x[j];
      grad[i] = g;
    }
    double best_g = 0.0;
    std::size_t best_i = c;
    for (std::size_t i = 0; i < c; ++i) {
      if (!passive[i] && grad[i] > best_g) {
        best_g = grad[i];
        best_i = i;
      }
    }
    if (best_i == c || best_g <= 1e-10 * kAscWeight * kAscWeight) break;
    passive[best_i] = true;

    // Inner loop: solve on the passive set; walk back and shrink the set
    // while the solution leaves the positive orthant.
    for (;;) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < c; ++i) {
        if (passive[i]) idx.push_back(i);
      }
      Matrix sub(idx.size(), idx.size());
      std::vector<double> subrhs(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < idx.size(); ++j) sub(i, j) = gram(idx[i], idx[j]);
        subrhs[i] = rhs[idx[i]];
      }
      std::vector<double> z;
      try {
        z = linalg::solve_spd(sub, subrhs);
      } catch (const NumericError&) {
        // Collinear passive set: retry with a tiny ridge, then give up on
        // the newest variable.
        try {
          for (std::size_t i = 0; i < idx.size(); ++i) {
            sub(i, i) += 1e-10 * sub(i, i);
          }
          z = linalg::solve_spd(sub, subrhs);
        } catch (const NumericError&) {
          passive[best_i] = false;
          break;
        }
      }
      bool feasible = true;
      for (const double v : z) {
        if (v <= 0.0) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        std::fill(x.begin(), x.end(), 0.0);
        for (std::size_t i = 0; i < idx.size(); ++i) x[idx[i]] = z[i];
        break;
      }
      // Step from x toward z until the first coordinate hits zero.
      double alpha = 1.0;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (z[i] <= 0.0) {
          const double xi = x[idx[i]];
          if (xi - z[i] > 0.0) alpha = std::min(alpha, xi / (xi - z[i]));
        }
      }
      for (std::size_t i = 0; i < idx.size(); ++i) {
        x[idx[i]] += alpha * (z[i] - x[idx[i]]);
      }
      for (std::size_t i = 0; i < c; ++i) {
        if (passive[i] && x[i] <= 1e-14) {
          passive[i] = false;
          x[i] = 0.0;
        }
      }
    }
  }

  solver::project_simplex(x.data(), c);
  return x;
}

AbundanceMatrix fcls(const HsiCube& cube, const SignatureMatrix& a,
                     int threads) {
  if (a.bands() != cube.bands()) {
    throw ShapeError("fcls: signature band count != cube band count");
  }
  const std::size_t n = cube.pixels();
  Matrix s(a.count(), n);
  parallel_for(n, threads, [&](std::size_t k) {
    const auto x = fcls_pixel(a.data(), cube.pixel(k));
    std::copy(x.begin(), x.end(), s.col(k));
  });
  return AbundanceMatrix(std::move(s));
}

std::pair<SignatureMatrix, AbundanceMatrix> random_init(std::size_t bands,
                                                        std::size_t count,
                                                        std::size_t pixels,
                                                        std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(bands, count);
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform();
  Matrix s(count, pixels);
  for (std::size_t k = 0; k < pixels; ++k) {
    const auto col = rng.simplex(count);
    std::copy(col.begin(), col.end(), s.col(k));
  }
  return {SignatureMatrix(std::move(a)), AbundanceMatrix(std::move(s))};
}

}  // namespace unmix::init
