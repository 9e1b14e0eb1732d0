#pragma once

#include <string>
#include <vector>

#include "unmix/core.hpp"

namespace unmix::graph {

// Pixel network: spatial adjacency (self excluded), correlation weights rho
// normalized over each neighborhood, and cluster labels. Immutable after
// construction; shared read-only by solver workers.
struct PixelGraph {
  std::vector<std::vector<std::size_t>> neighbors;  // N_k minus self
  std::vector<std::vector<double>> rho;             // aligned with neighbors
  std::vector<int> labels;                          // cluster id per pixel
  std::vector<std::string> warnings;

  std::size_t size() const { return neighbors.size(); }
};

// Grid adjacency for a width x height scene, 4- or 8-connected. Border
// pixels get truncated neighborhoods.
std::vector<std::vector<std::size_t>> build_neighborhood(std::size_t width,
                                                         std::size_t height,
                                                         int connectivity);

// cos angle between two spectra; throws NumericError on a zero vector.
double cosine_similarity(const double* a, const double* b, std::size_t len);
double cosine_similarity(const std::vector<double>& a,
                         const std::vector<double>& b);

// Normalized spectral similarity per pixel: rho_kj = theta(y_k, y_j) /
// sum_l theta(y_k, y_l) over l in the neighborhood. Falls back to uniform
// weights (with a warning) should a denominator be <= 0, which cannot
// happen for nonzero nonnegative spectra.
std::vector<std::vector<double>> compute_rho(
    const HsiCube& cube, const std::vector<std::vector<std::size_t>>& neighbors,
    std::vector<std::string>* warnings = nullptr);

// Neighbors of k restricted to k's own cluster; may be empty.
std::vector<std::size_t> effective_neighbors(const PixelGraph& g, std::size_t k);

// Adjacency + weights in one step; labels must be filled in by the caller
// (or left as a single cluster).
PixelGraph build(const HsiCube& cube, int connectivity,
                 std::vector<int> labels = {});

// Debug dump: "pixel,neighbor,rho" rows.
void dump_csv(const PixelGraph& g, const std::string& path);

}  // namespace unmix::graph
