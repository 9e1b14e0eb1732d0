#pragma once

#include <functional>
#include <string>
#include <vector>

#include "unmix/core.hpp"
#include "unmix/graph.hpp"

namespace unmix::solver {

// Baselines realized as parameterizations of the one solver.
enum class Variant {
  proposed,           // clusters from config, eta > 0, lambda auto
  distributed_sparse, // single cluster, eta > 0, lambda auto
  distributed,        // single cluster, eta > 0, lambda = 0
  lq_nmf,             // eta = 0, lambda auto
  plain_nmf,          // eta = 0, lambda = 0
};

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// Applies a variant's parameter pinning to a base configuration.
SolverConfig apply_variant(SolverConfig cfg, Variant v);

// Sparsity weight from band-wise l1/l2 ratios:
//   lambda = (1/sqrt(L)) * sum_l (sqrt(N) - |y_l|_1 / |y_l|_2) / sqrt(N-1)
// with y_l the l-th band row. Zero bands are skipped with a warning; a
// single-pixel cube returns 0 with a warning.
double lambda_auto(const HsiCube& cube,
                   std::vector<std::string>* warnings = nullptr);

// Euclidean projection onto {s : s >= 0, sum s = 1} (the constraint
// operator applied after every abundance update). Idempotent: already
// feasible inputs are returned unchanged, bit for bit.
void project_simplex(double* v, std::size_t c);
std::vector<double> project_simplex(std::vector<double> v);

// (sum_n s_n^q)^(1/q) for nonnegative s.
double lq_norm(const double* s, std::size_t c, double q);

// Per-node cost: squared residual + weighted neighborhood disagreement +
// sparsity penalty. neighbor_s holds the abundance columns of the
// cluster-restricted neighborhood, rho_k the matching weights.
double local_cost(const Matrix& a, const double* y, const double* s,
                  const std::vector<const double*>& neighbor_s,
                  const std::vector<double>& rho_k, double eta, double lambda,
                  double q);

// Analytic gradient of local_cost with respect to s (descent-consistent
// neighborhood sign, i.e. the true derivative of the penalty). Floors on
// the sparsity denominators follow sparsity_floor.
std::vector<double> local_cost_gradient(
    const Matrix& a, const double* y, const double* s,
    const std::vector<const double*>& neighbor_s,
    const std::vector<double>& rho_k, double eta, double lambda, double q,
    double sparsity_floor = 1e-8);

// One projected abundance update for pixel k, reading iteration-i values
// from s_prev (Jacobi sweep).
std::vector<double> abundance_step(const Matrix& a, const HsiCube& cube,
                                   const Matrix& s_prev,
                                   const graph::PixelGraph& g, std::size_t k,
                                   const SolverConfig& cfg, double lambda);

// Multiplicative signature update A <- A .* (Y S^T) ./ (A S S^T + delta),
// with A floored strictly positive on entry.
Matrix signature_step(const Matrix& a, const Matrix& s, const Matrix& y);

// Divergence predicate on the cost history: true when the latest cost
// exceeds 10x the cost from 10 iterations earlier.
bool cost_diverged(const std::vector<double>& history);

enum class StoppedBy { max_iter, tolerance };

struct SolverState {
  Matrix a;  // L x c
  Matrix s;  // c x N
  std::size_t iterations = 0;
  std::vector<double> cost_history;  // objective per completed iteration
  double lambda = 0.0;
  StoppedBy stopped_by = StoppedBy::max_iter;
};

struct RunReport {
  Variant variant = Variant::proposed;
  SolverConfig config;
  double lambda_used = 0.0;
  std::size_t iterations = 0;
  StoppedBy stopped_by = StoppedBy::max_iter;
  std::vector<double> cost_history;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
};

using IterationObserver = std::function<void(
    std::size_t iteration, const Matrix& a, const Matrix& s, double cost)>;

struct RunOptions {
  int threads = 1;
  // Cluster labels to use instead of running FCM internally (proposed
  // variant with clusters > 1 computes them when absent).
  std::vector<int> labels;
  IterationObserver observer;
};

struct RunResult {
  SolverState state;
  RunReport report;
};

// Algorithm loop: signature update, Jacobi abundance sweep with projection,
// cost evaluation, until |dJ| < epsilon or the iteration budget is spent.
RunResult run(const HsiCube& cube, const SolverConfig& cfg, Variant variant,
              const Matrix& a0, const Matrix& s0,
              const RunOptions& opts = {});

}  // namespace unmix::solver
