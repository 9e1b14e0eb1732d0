#include "unmix/graph.hpp"

#include <cmath>
#include <fstream>

#include "unmix/errors.hpp"
#include "unmix/kernels.hpp"

namespace unmix::graph {

std::vector<std::vector<std::size_t>> build_neighborhood(std::size_t width,
                                                         std::size_t height,
                                                         int connectivity) {
  if (width == 0 || height == 0) {
    throw ArgumentError("build_neighborhood: zero-sized grid");
  }
  if (connectivity != 4 && connectivity != 8) {
    throw ArgumentError("build_neighborhood: connectivity must be 4 or 8");
  }
  const std::size_t n = width * height;
  std::vector<std::vector<std::size_t>> nb(n);
  const bool diag = connectivity == 8;
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      auto& list = nb[y * width + x];
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (!diag && dx != 0 && dy != 0) continue;
          const long long xx = static_cast<long long>(x) + dx;
          const long long yy = static_cast<long long>(y) + dy;
          if (xx < 0 || yy < 0 || xx >= static_cast<long long>(width) ||
              yy >= static_cast<long long>(height)) {
            continue;
          }
          list.push_back(static_cast<std::size_t>(yy) * width +
                         static_cast<std::size_t>(xx));
        }
      }
    }
  }
  return nb;
}

double cosine_similarity(const double* a, const double* b, std::size_t len) {
  const auto& k = kernels::active();
  const double na = k.nrm2sq(a, len);
  const double nbv = k.nrm2sq(b, len);
  if (na == 0.0 || nbv == 0.0) {
    throw NumericError("cosine_similarity: zero-norm spectrum");
  }
  return k.dot(a, b, len) / std::sqrt(na * nbv);
}

double cosine_similarity(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw ShapeError("cosine_similarity: lengths differ");
  }
  return cosine_similarity(a.data(), b.data(), a.size());
}

std::vector<std::vector<double>> compute_rho(
    const HsiCube& cube, const std::vector<std::vector<std::size_t>>& neighbors,
    std::vector<std::string>* warnings) {
  if (neighbors.size() != cube.pixels()) {
    throw ShapeError("compute_rho: neighborhood built for a different grid");
  }
  const std::size_t bands = cube.bands();
  std::vector<std::vector<double>> rho(neighbors.size());
  for (std::size_t k = 0; k < neighbors.size(); ++k) {
    const auto& nk = neighbors[k];
    auto& rk = rho[k];
    rk.resize(nk.size());
    if (nk.empty()) continue;
    double denom = 0.0;
    for (std::size_t j = 0; j < nk.size(); ++j) {
      rk[j] = cosine_similarity(cube.pixel(k), cube.pixel(nk[j]), bands);
      denom += rk[j];
    }
    if (denom <= 0.0) {
      // Unreachable for nonzero nonnegative reflectances; uniform fallback.
      if (warnings) {
        warnings->push_back("compute_rho: nonpositive similarity sum at pixel " +
                            std::to_string(k) + ", using uniform weights");
      }
      const double u = 1.0 / static_cast<double>(nk.size());
      for (auto& w : rk) w = u;
    } else {
      for (auto& w : rk) w /= denom;
    }
  }
  return rho;
}

std::vector<std::size_t> effective_neighbors(const PixelGraph& g, std::size_t k) {
  std::vector<std::size_t> out;
  const int label = g.labels[k];
  for (const std::size_t j : g.neighbors[k]) {
    if (g.labels[j] == label) out.push_back(j);
  }
  return out;
}

PixelGraph build(const HsiCube& cube, int connectivity, std::vector<int> labels) {
  PixelGraph g;
  g.neighbors = build_neighborhood(cube.width(), cube.height(), connectivity);
  g.rho = compute_rho(cube, g.neighbors, &g.warnings);
  if (labels.empty()) {
    g.labels.assign(cube.pixels(), 0);
  } else {
    if (labels.size() != cube.pixels()) {
      throw ShapeError("graph::build: label count != pixel count");
    }
    g.labels = std::move(labels);
  }
  return g;
}

void dump_csv(const PixelGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("dump_csv: cannot open " + path);
  out << "pixel,neighbor,rho\n";
  for (std::size_t k = 0; k < g.size(); ++k) {
    for (std::size_t j = 0; j < g.neighbors[k].size(); ++j) {
      out << k << ',' << g.neighbors[k][j] << ',' << g.rho[k][j] << '\n';
    }
  }
}

}  // namespace unmix::graph
