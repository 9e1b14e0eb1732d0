#include "unmix/fcm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "unmix/errors.hpp"
#include "unmix/kernels.hpp"
#include "unmix/parallel.hpp"
#include "unmix/rng.hpp"

namespace unmix::fcm {

namespace {

// k-means++-style seeding: first center uniform, later centers drawn with
// probability proportional to squared distance from the nearest chosen one.
Matrix seed_centers(const HsiCube& cube, std::size_t clusters, Rng& rng) {
  const std::size_t n = cube.pixels();
  const std::size_t bands = cube.bands();
  const auto& k = kernels::active();
  Matrix centers(bands, clusters);

  std::size_t first = rng.index(n);
  for (std::size_t b = 0; b < bands; ++b) centers(b, 0) = cube.pixel(first)[b];

  std::vector<double> d2(n, std::numeric_limits<double>::max());
  for (std::size_t c = 1; c < clusters; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = k.sqdist(cube.pixel(i), centers.col(c - 1), bands);
      if (d < d2[i]) d2[i] = d;
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.index(n);  // all points coincide
    }
    for (std::size_t b = 0; b < bands; ++b) centers(b, c) = cube.pixel(pick)[b];
  }
  return centers;
}

}  // namespace

FcmResult fcm_cluster(const HsiCube& cube, std::size_t clusters,
                      const FcmOptions& opts, const FcmObserver& observer) {
  const std::size_t n = cube.pixels();
  const std::size_t bands = cube.bands();
  if (clusters < 1 || clusters > n) {
    throw ArgumentError("fcm_cluster: cluster count must be in [1, pixels]");
  }
  if (!(opts.fuzzifier > 1.0)) {
    throw ArgumentError("fcm_cluster: fuzzifier must be > 1");
  }
  if (!(opts.tol > 0.0)) throw ArgumentError("fcm_cluster: tol must be > 0");

  const auto& k = kernels::active();
  FcmResult res;
  res.membership = Matrix(clusters, n);
  res.centers = Matrix(bands, clusters);

  if (clusters == 1) {
    // Degenerate case: everything belongs to the single cluster, whose
    // center is the mean spectrum.
    for (std::size_t i = 0; i < n; ++i) res.membership(0, i) = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      k.axpy(1.0, cube.pixel(i), res.centers.col(0), bands);
    }
    k.scal(1.0 / static_cast<double>(n), res.centers.col(0), bands);
    res.labels.assign(n, 0);
    res.iterations = 1;
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      obj += k.sqdist(cube.pixel(i), res.centers.col(0), bands);
    }
    res.objective_history.push_back(obj);
    if (observer) observer(0, res.membership, res.centers, obj);
    return res;
  }

  Rng rng(opts.seed);
  res.centers = seed_centers(cube, clusters, rng);

  const double exponent = 2.0 / (opts.fuzzifier - 1.0);
  Matrix d2(clusters, n);

  for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
    // Membership update from current centers.
    parallel_for(n, opts.threads, [&](std::size_t i) {
      for (std::size_t c = 0; c < clusters; ++c) {
        d2(c, i) = k.sqdist(cube.pixel(i), res.centers.col(c), bands);
      }
      // A coincident point/center gets full membership there.
      std::size_t zero_at = clusters;
      for (std::size_t c = 0; c < clusters; ++c) {
        if (d2(c, i) == 0.0) {
          zero_at = c;
          break;
        }
      }
      double* u = res.membership.col(i);
      if (zero_at < clusters) {
        for (std::size_t c = 0; c < clusters; ++c) u[c] = 0.0;
        u[zero_at] = 1.0;
        return;
      }
      for (std::size_t c = 0; c < clusters; ++c) {
        double inv = 0.0;
        for (std::size_t j = 0; j < clusters; ++j) {
          inv += std::pow(d2(c, i) / d2(j, i), exponent * 0.5);
        }
        u[c] = 1.0 / inv;
      }
    });

    // Center update from the fresh memberships.
    Matrix new_centers(bands, clusters);
    std::vector<double> mass(clusters, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* u = res.membership.col(i);
      for (std::size_t c = 0; c < clusters; ++c) {
        const double w = std::pow(u[c], opts.fuzzifier);
        mass[c] += w;
        k.axpy(w, cube.pixel(i), new_centers.col(c), bands);
      }
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      if (mass[c] > 0.0) {
        k.scal(1.0 / mass[c], new_centers.col(c), bands);
      } else {
        // Empty cluster: re-seed from the point farthest from any center.
        res.warnings.push_back("fcm: cluster " + std::to_string(c) +
                               " lost all mass at iteration " +
                               std::to_string(iter) + ", re-seeded");
        double best = -1.0;
        std::size_t far = 0;
        for (std::size_t i = 0; i < n; ++i) {
          double nearest = std::numeric_limits<double>::max();
          for (std::size_t cc = 0; cc < clusters; ++cc) {
            nearest = std::min(nearest, k.sqdist(cube.pixel(i), res.centers.col(cc), bands));
          }
          if (nearest > best) {
            best = nearest;
            far = i;
          }
        }
        for (std::size_t b = 0; b < bands; ++b) new_centers(b, c) = cube.pixel(far)[b];
      }
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < clusters; ++c) {
      shift = std::max(shift, std::sqrt(k.sqdist(new_centers.col(c),
                                                 res.centers.col(c), bands)));
    }
    res.centers = std::move(new_centers);
    res.final_shift = shift;
    ++res.iterations;

    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* u = res.membership.col(i);
      for (std::size_t c = 0; c < clusters; ++c) {
        obj += std::pow(u[c], opts.fuzzifier) *
               k.sqdist(cube.pixel(i), res.centers.col(c), bands);
      }
    }
    res.objective_history.push_back(obj);
    if (observer) observer(iter, res.membership, res.centers, obj);

    if (shift < opts.tol) break;
  }

  res.labels = harden(res.membership);
  return res;
}

std::vector<int> harden(const Matrix& membership) {
  std::vector<int> labels(membership.cols(), 0);
  for (std::size_t i = 0; i < membership.cols(); ++i) {
    const double* u = membership.col(i);
    std::size_t best = 0;
    for (std::size_t c = 1; c < membership.rows(); ++c) {
      if (u[c] > u[best]) best = c;  // strict: ties keep the lowest id
    }
    labels[i] = static_cast<int>(best);
  }
  return labels;
}

void write_label_pgm(const std::vector<int>& labels, std::size_t width,
                     std::size_t height, std::size_t clusters,
                     const std::string& path) {
  if (labels.size() != width * height) {
    throw ShapeError("write_label_pgm: label count != width*height");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("write_label_pgm: cannot open " + path);
  out << "P5\n" << width << " " << height << "\n255\n";
  const double scale = clusters > 1 ? 255.0 / static_cast<double>(clusters - 1) : 0.0;
  for (const int id : labels) {
    const int v = static_cast<int>(std::lround(id * scale));
    out.put(static_cast<char>(std::clamp(v, 0, 255)));
  }
}

void write_label_csv(const std::vector<int>& labels, std::size_t width,
                     std::size_t height, const std::string& path) {
  if (labels.size() != width * height) {
    throw ShapeError("write_label_csv: label count != width*height");
  }
  std::ofstream out(path);
  if (!out) throw IoError("write_label_csv: cannot open " + path);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      if (x) out << ',';
      out << labels[y * width + x];
    }
    out << '\n';
  }
}

std::vector<int> read_labels_csv(const std::string& path, std::size_t pixels) {
  std::ifstream in(path);
  if (!in) throw IoError("read_labels_csv: cannot open " + path);
  std::vector<int> labels;
  labels.reserve(pixels);
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell.empty()) continue;
      labels.push_back(std::stoi(cell));
    }
  }
  if (labels.size() != pixels) {
    throw ParseError("read_labels_csv: expected " + std::to_string(pixels) +
                     " labels, found " + std::to_string(labels.size()));
  }
  return labels;
}

}  // namespace unmix::fcm
