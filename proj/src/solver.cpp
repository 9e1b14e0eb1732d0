#include "unmix/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "unmix/errors.hpp"
#include "unmix/fcm.hpp"
#include "unmix/kernels.hpp"
#include "unmix/parallel.hpp"

namespace unmix::solver {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::proposed: return "proposed";
    case Variant::distributed_sparse: return "dist-sparse";
    case Variant::distributed: return "dist";
    case Variant::lq_nmf: return "lq-nmf";
    case Variant::plain_nmf: return "plain-nmf";
  }
  return "unknown";
}

Variant variant_from_name(const std::string& name) {
  if (name == "proposed") return Variant::proposed;
  if (name == "dist-sparse") return Variant::distributed_sparse;
  if (name == "dist") return Variant::distributed;
  if (name == "lq-nmf") return Variant::lq_nmf;
  if (name == "plain-nmf") return Variant::plain_nmf;
  throw ArgumentError("unknown variant '" + name + "'");
}

SolverConfig apply_variant(SolverConfig cfg, Variant v) {
  // Each baseline pins the terms that define it; the proposed variant keeps
  // the configuration as given (defaults: clusters from config, eta > 0,
  // lambda automatic), so the full code path stays parameterizable.
  switch (v) {
    case Variant::proposed:
      break;
    case Variant::distributed_sparse:
      cfg.clusters = 1;
      break;
    case Variant::distributed:
      cfg.clusters = 1;
      cfg.lambda_mode = LambdaMode::fixed;
      cfg.lambda_fixed = 0.0;
      break;
    case Variant::lq_nmf:
      cfg.eta = 0.0;
      break;
    case Variant::plain_nmf:
      cfg.eta = 0.0;
      cfg.lambda_mode = LambdaMode::fixed;
      cfg.lambda_fixed = 0.0;
      break;
  }
  return cfg;
}

double lambda_auto(const HsiCube& cube, std::vector<std::string>* warnings) {
  const std::size_t bands = cube.bands();
  const std::size_t n = cube.pixels();
  if (n == 1) {
    if (warnings) {
      warnings->push_back("lambda_auto: single-pixel cube, returning 0");
    }
    return 0.0;
  }
  const Matrix& y = cube.data();
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double sqrt_n1 = std::sqrt(static_cast<double>(n - 1));
  double acc = 0.0;
  for (std::size_t l = 0; l < bands; ++l) {
    double l1 = 0.0, l2sq = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = y(l, k);
      l1 += std::fabs(v);
      l2sq += v * v;
    }
    if (l2sq == 0.0) {
      if (warnings) {
        warnings->push_back("lambda_auto: band " + std::to_string(l) +
                            " is identically zero, skipped");
      }
      continue;
    }
    acc += (sqrt_n - l1 / std::sqrt(l2sq)) / sqrt_n1;
  }
  return acc / std::sqrt(static_cast<double>(bands));
}

void project_simplex(double* v, std::size_t c) {
  if (c == 0) return;
  double sum = 0.0;
  double min_entry = v[0];
  for (std::size_t i = 0; i < c; ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericError("project_simplex: non-finite input");
    }
    sum += v[i];
    min_entry = std::min(min_entry, v[i]);
  }
  // Feasible points pass through untouched, which makes the operator
  // exactly idempotent (its own output satisfies this test).
  if (min_entry >= 0.0 && std::fabs(sum - 1.0) <= 1e-12) return;

  // Sort descending, then find the largest support whose water level keeps
  // every retained entry positive.
  std::vector<double> u(v, v + c);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0;
  double tau = 0.0;
  std::size_t support = 0;
  for (std::size_t j = 0; j < c; ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) {
      tau = t;
      support = j + 1;
    }
  }
  if (support == 0) {
    // All mass below the level set; fall back to uniform (can only happen
    // for pathological inputs after the finite check).
    const double uni = 1.0 / static_cast<double>(c);
    for (std::size_t i = 0; i < c; ++i) v[i] = uni;
    return;
  }
  for (std::size_t i = 0; i < c; ++i) v[i] = std::max(v[i] - tau, 0.0);
}

std::vector<double> project_simplex(std::vector<double> v) {
  project_simplex(v.data(), v.size());
  return v;
}

double lq_norm(const double* s, std::size_t c, double q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < c; ++i) acc += std::pow(std::fabs(s[i]), q);
  return std::pow(acc, 1.0 / q);
}

namespace {

// Sparsity direction d with d_n = s_n / max(|s_n|^(2-q), floor) / |s|_q^(q-1);
// equal to the gradient of |s|_q wherever the floors are inactive. Returns
// all zeros when |s|_q is below the floor.
void sparsity_term(const double* s, std::size_t c, double q, double floor,
                   double* out) {
  const double nq = lq_norm(s, c, q);
  if (nq < floor) {
    std::fill(out, out + c, 0.0);
    return;
  }
  const double denom_norm = std::pow(nq, q - 1.0);
  for (std::size_t n = 0; n < c; ++n) {
    const double mag = std::fabs(s[n]);
    const double denom = std::max(std::pow(mag, 2.0 - q), floor);
    out[n] = s[n] / denom / denom_norm;
  }
}

}  // namespace

double local_cost(const Matrix& a, const double* y, const double* s,
                  const std::vector<const double*>& neighbor_s,
                  const std::vector<double>& rho_k, double eta, double lambda,
                  double q) {
  if (neighbor_s.size() != rho_k.size()) {
    throw ShapeError("local_cost: neighbor/weight lists differ in length");
  }
  const auto& k = kernels::active();
  const std::size_t bands = a.rows();
  const std::size_t c = a.cols();

  std::vector<double> residual(y, y + bands);
  for (std::size_t n = 0; n < c; ++n) k.axpy(-s[n], a.col(n), residual.data(), bands);
  double cost = k.nrm2sq(residual.data(), bands);

  if (eta > 0.0) {
    double nb = 0.0;
    for (std::size_t j = 0; j < neighbor_s.size(); ++j) {
      nb += rho_k[j] * k.sqdist(s, neighbor_s[j], c);
    }
    cost += eta * nb;
  }
  if (lambda > 0.0) cost += lambda * lq_norm(s, c, q);
  return cost;
}

std::vector<double> local_cost_gradient(
    const Matrix& a, const double* y, const double* s,
    const std::vector<const double*>& neighbor_s,
    const std::vector<double>& rho_k, double eta, double lambda, double q,
    double sparsity_floor) {
  if (neighbor_s.size() != rho_k.size()) {
    throw ShapeError("local_cost_gradient: neighbor/weight lists differ in length");
  }
  const auto& k = kernels::active();
  const std::size_t bands = a.rows();
  const std::size_t c = a.cols();

  std::vector<double> residual(y, y + bands);
  for (std::size_t n = 0; n < c; ++n) k.axpy(-s[n], a.col(n), residual.data(), bands);

  std::vector<double> grad(c, 0.0);
  for (std::size_t n = 0; n < c; ++n) {
    grad[n] = -2.0 * k.dot(a.col(n), residual.data(), bands);
  }
  if (eta > 0.0) {
    for (std::size_t j = 0; j < neighbor_s.size(); ++j) {
      const double w = 2.0 * eta * rho_k[j];
      for (std::size_t n = 0; n < c; ++n) grad[n] += w * (s[n] - neighbor_s[j][n]);
    }
  }
  if (lambda > 0.0) {
    std::vector<double> sp(c);
    sparsity_term(s, c, q, sparsity_floor, sp.data());
    for (std::size_t n = 0; n < c; ++n) grad[n] += lambda * sp[n];
  }
  return grad;
}

namespace {

// Shared per-pixel update used by both abundance_step and the run loop.
// Buffers are caller-provided so the hot path does not allocate.
void update_pixel(const Matrix& a, const double* y, const Matrix& s_prev,
                  const graph::PixelGraph& g, std::size_t k,
                  const SolverConfig& cfg, double lambda, double* residual,
                  double* out) {
  const auto& ker = kernels::active();
  const std::size_t bands = a.rows();
  const std::size_t c = a.cols();
  const double* s = s_prev.col(k);

  // r = y - A s, then s + mu * A^T r.
  std::copy(y, y + bands, residual);
  for (std::size_t n = 0; n < c; ++n) ker.axpy(-s[n], a.col(n), residual, bands);
  for (std::size_t n = 0; n < c; ++n) {
    out[n] = s[n] + cfg.mu * ker.dot(a.col(n), residual, bands);
  }

  if (cfg.eta > 0.0) {
    const double sign =
        cfg.gradient_sign == GradientSign::descent_consistent ? 1.0 : -1.0;
    const int label = g.labels[k];
    const auto& nk = g.neighbors[k];
    const auto& rk = g.rho[k];
    for (std::size_t j = 0; j < nk.size(); ++j) {
      if (g.labels[nk[j]] != label) continue;
      const double w = sign * cfg.mu * cfg.eta * rk[j];
      const double* sl = s_prev.col(nk[j]);
      for (std::size_t n = 0; n < c; ++n) out[n] += w * (sl[n] - s[n]);
    }
  }

  if (lambda > 0.0) {
    double sp[64];
    sparsity_term(s, c, cfg.q, cfg.sparsity_floor, sp);
    for (std::size_t n = 0; n < c; ++n) out[n] -= cfg.mu * lambda * sp[n];
  }

  project_simplex(out, c);
}

double objective(const Matrix& y, const Matrix& a, const Matrix& s,
                 const graph::PixelGraph& g, double eta, double lambda,
                 double q) {
  const auto& ker = kernels::active();
  const std::size_t bands = a.rows();
  const std::size_t c = a.cols();
  const std::size_t n = s.cols();

  double cost = 0.0;
  std::vector<double> residual(bands);
  for (std::size_t px = 0; px < n; ++px) {
    std::copy(y.col(px), y.col(px) + bands, residual.begin());
    for (std::size_t e = 0; e < c; ++e) {
      ker.axpy(-s(e, px), a.col(e), residual.data(), bands);
    }
    cost += ker.nrm2sq(residual.data(), bands);
  }

  if (eta > 0.0) {
    double nb = 0.0;
    for (std::size_t px = 0; px < n; ++px) {
      const int label = g.labels[px];
      const auto& nk = g.neighbors[px];
      const auto& rk = g.rho[px];
      for (std::size_t j = 0; j < nk.size(); ++j) {
        if (g.labels[nk[j]] != label) continue;
        nb += rk[j] * ker.sqdist(s.col(nk[j]), s.col(px), c);
      }
    }
    cost += eta * nb;
  }
  if (lambda > 0.0) {
    double sp = 0.0;
    for (std::size_t px = 0; px < n; ++px) sp += lq_norm(s.col(px), c, q);
    cost += lambda * sp;
  }
  return cost;
}

}  // namespace

std::vector<double> abundance_step(const Matrix& a, const HsiCube& cube,
                                   const Matrix& s_prev,
                                   const graph::PixelGraph& g, std::size_t k,
                                   const SolverConfig& cfg, double lambda) {
  if (a.cols() != s_prev.rows() || a.cols() > 64) {
    throw ShapeError("abundance_step: bad endmember count");
  }
  std::vector<double> residual(a.rows());
  std::vector<double> out(a.cols());
  update_pixel(a, cube.pixel(k), s_prev, g, k, cfg, lambda, residual.data(),
               out.data());
  return out;
}

Matrix signature_step(const Matrix& a, const Matrix& s, const Matrix& y) {
  if (a.cols() != s.rows() || a.rows() != y.rows() || s.cols() != y.cols()) {
    throw ShapeError("signature_step: dimension mismatch");
  }
  constexpr double kDelta = 1e-12;
  Matrix out = a;
  // Strictly positive entry floor lets zeroed entries re-enter the update.
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out.data()[i] < kDelta) out.data()[i] = kDelta;
  }
  const Matrix num = linalg::matmul_nt(y, s);        // Y S^T
  const Matrix sst = linalg::matmul_nt(s, s);        // S S^T
  const Matrix den = linalg::matmul(out, sst);       // A S S^T
  kernels::active().mul_ratio(out.data(), num.data(), den.data(), kDelta,
                              out.size());
  return out;
}

bool cost_diverged(const std::vector<double>& history) {
  const std::size_t n = history.size();
  return n >= 10 && history[n - 1] > 10.0 * history[n - 10];
}

RunResult run(const HsiCube& cube, const SolverConfig& base_cfg,
              Variant variant, const Matrix& a0, const Matrix& s0,
              const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  SolverConfig cfg = apply_variant(base_cfg, variant);
  cfg.validate();

  const std::size_t bands = cube.bands();
  const std::size_t n = cube.pixels();
  const std::size_t c = a0.cols();
  if (a0.rows() != bands) throw ShapeError("run: A row count != band count");
  if (s0.rows() != c || s0.cols() != n) {
    throw ShapeError("run: S shape does not match A and the cube");
  }
  if (c > 64) throw ArgumentError("run: more than 64 endmembers unsupported");

  RunResult result;
  RunReport& rep = result.report;
  rep.variant = variant;
  rep.config = cfg;

  // Cluster labels: the proposed variant consumes FCM labels; every other
  // variant runs single-task (one cluster).
  std::vector<int> labels;
  if (variant == Variant::proposed && cfg.clusters > 1) {
    if (!opts.labels.empty()) {
      if (opts.labels.size() != n) {
        throw ShapeError("run: provided label count != pixel count");
      }
      labels = opts.labels;
    } else {
      fcm::FcmOptions fopts;
      fopts.seed = cfg.seed;
      fopts.threads = opts.threads;
      auto fres = fcm::fcm_cluster(cube, cfg.clusters, fopts);
      labels = std::move(fres.labels);
      for (auto& w : fres.warnings) rep.warnings.push_back(std::move(w));
    }
  } else {
    labels.assign(n, 0);
  }

  // The network is frozen before the iterations: adjacency from the grid,
  // rho from the observed (noisy) cube.
  graph::PixelGraph g;
  if (cfg.eta > 0.0) {
    g = graph::build(cube, cfg.connectivity, std::move(labels));
    for (auto& w : g.warnings) rep.warnings.push_back(w);
  } else {
    // Neighborhood term off: skip the rho computation entirely.
    g.neighbors.assign(n, {});
    g.rho.assign(n, {});
    g.labels = std::move(labels);
  }

  double lambda = 0.0;
  if (cfg.lambda_mode == LambdaMode::automatic) {
    lambda = lambda_auto(cube, &rep.warnings);
  } else {
    lambda = cfg.lambda_fixed;
  }
  rep.lambda_used = lambda;

  SolverState& st = result.state;
  st.a = a0;
  st.s = s0;
  st.lambda = lambda;

  // Project the initializer so the feasibility invariant holds from the
  // first iterate, even for mildly infeasible external inputs.
  for (std::size_t px = 0; px < n; ++px) project_simplex(st.s.col(px), c);

  double j_old = objective(cube.data(), st.a, st.s, g, cfg.eta, lambda, cfg.q);
  st.stopped_by = StoppedBy::max_iter;

  Matrix s_next(c, n);
  for (std::size_t iter = 0; iter < cfg.max_iter; ++iter) {
    st.a = signature_step(st.a, st.s, cube.data());

    // Jacobi sweep: every pixel reads iteration-i values from st.s and
    // writes its own column of s_next.
    parallel_for(n, opts.threads, [&](std::size_t px) {
      double residual[512];
      double out[64];
      std::vector<double> heap_residual;
      double* r = residual;
      if (bands > 512) {
        heap_residual.resize(bands);
        r = heap_residual.data();
      }
      update_pixel(st.a, cube.pixel(px), st.s, g, px, cfg, lambda, r, out);
      std::copy(out, out + c, s_next.col(px));
    });
    std::swap(st.s, s_next);

    const double j_new =
        objective(cube.data(), st.a, st.s, g, cfg.eta, lambda, cfg.q);
    st.cost_history.push_back(j_new);
    st.iterations = iter + 1;
    if (opts.observer) opts.observer(iter, st.a, st.s, j_new);

    // Divergence guard: cost exploding across a 10-iteration window points
    // at a too-large step size.
    if (cost_diverged(st.cost_history)) {
      throw DivergenceError(
          "solver diverging: cost grew more than 10x over 10 iterations "
          "(mu=" + std::to_string(cfg.mu) + " is likely too large)");
    }

    if (std::fabs(j_new - j_old) < cfg.epsilon) {
      st.stopped_by = StoppedBy::tolerance;
      j_old = j_new;
      break;
    }
    j_old = j_new;
  }

  rep.iterations = st.iterations;
  rep.stopped_by = st.stopped_by;
  rep.cost_history = st.cost_history;
  const auto t1 = std::chrono::steady_clock::now();
  rep.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return result;
}

}  // namespace unmix::solver
