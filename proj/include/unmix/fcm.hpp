#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "unmix/core.hpp"

namespace unmix::fcm {

struct FcmResult {
  Matrix membership;  // C x N, columns sum to 1
  Matrix centers;     // L x C
  std::vector<int> labels;
  std::size_t iterations = 0;
  double final_shift = 0.0;
  std::vector<double> objective_history;  // one value per iteration
  std::vector<std::string> warnings;
};

struct FcmOptions {
  double fuzzifier = 2.0;  // m > 1
  double tol = 1e-5;       // on max center shift
  std::size_t max_iter = 300;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Called after each iteration with the fresh membership/centers and the
// FCM objective sum_k sum_c u_ck^m ||y_k - v_c||^2.
using FcmObserver =
    std::function<void(std::size_t iter, const Matrix& membership,
                       const Matrix& centers, double objective)>;

// Standard Bezdek fuzzy c-means on raw pixel spectra. Deterministic for a
// fixed seed; k-means++-style center seeding.
FcmResult fcm_cluster(const HsiCube& cube, std::size_t clusters,
                      const FcmOptions& opts = {},
                      const FcmObserver& observer = nullptr);

// Argmax per membership column; ties go to the lowest cluster id.
std::vector<int> harden(const Matrix& membership);

// Label map exports for cluster figures.
void write_label_pgm(const std::vector<int>& labels, std::size_t width,
                     std::size_t height, std::size_t clusters,
                     const std::string& path);
void write_label_csv(const std::vector<int>& labels, std::size_t width,
                     std::size_t height, const std::string& path);

// Import hook for externally produced labels (one id per line, row-major).
std::vector<int> read_labels_csv(const std::string& path, std::size_t pixels);

}  // namespace unmix::fcm
