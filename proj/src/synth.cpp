#include "unmix/synth.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "unmix/errors.hpp"
#include "unmix/kernels.hpp"
#include "unmix/rng.hpp"

namespace unmix::synth {

void SynthSpec::validate(std::size_t library_count) const {
  if (width == 0 || height == 0) throw ArgumentError("synth: zero-sized grid");
  if (endmembers < 1) throw ArgumentError("synth: endmember count must be >= 1");
  if (endmembers > library_count) {
    throw ArgumentError("synth: endmember count exceeds library size");
  }
  if (block_size == 0 || block_size > width || block_size > height) {
    throw ArgumentError("synth: block size must fit the grid");
  }
  if (filter_size < 1 || filter_size % 2 == 0) {
    throw ArgumentError("synth: filter size must be odd and >= 1");
  }
  if (!(purity_threshold > 0.0) || purity_threshold > 1.0) {
    throw ArgumentError("synth: purity threshold must be in (0, 1]");
  }
}

namespace {

// Symmetric reflection for filter taps that fall off the grid.
std::size_t mirror(long long i, std::size_t size) {
  const long long s = static_cast<long long>(size);
  while (i < 0 || i >= s) {
    if (i < 0) i = -i - 1;
    if (i >= s) i = 2 * s - i - 1;
  }
  return static_cast<std::size_t>(i);
}

// Uniform mean filter over one abundance plane.
std::vector<double> mean_filter(const std::vector<double>& plane,
                                std::size_t width, std::size_t height,
                                std::size_t filter_size) {
  if (filter_size == 1) return plane;
  const int half = static_cast<int>(filter_size / 2);
  const double inv = 1.0 / static_cast<double>(filter_size * filter_size);
  std::vector<double> out(plane.size());
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int dy = -half; dy <= half; ++dy) {
        const std::size_t yy = mirror(static_cast<long long>(y) + dy, height);
        for (int dx = -half; dx <= half; ++dx) {
          const std::size_t xx = mirror(static_cast<long long>(x) + dx, width);
          acc += plane[yy * width + xx];
        }
      }
      out[y * width + x] = acc * inv;
    }
  }
  return out;
}

}  // namespace

Scene generate_scene(const SynthSpec& spec, const SignatureMatrix& library) {
  spec.validate(library.count());
  const std::size_t c = spec.endmembers;
  const std::size_t n = spec.width * spec.height;
  Rng rng(spec.seed);

  // Random library materials for this scene.
  const auto picks = rng.distinct(c, library.count());
  Matrix a(library.bands(), c);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < c; ++j) {
    std::copy(library.spectrum(picks[j]), library.spectrum(picks[j]) + library.bands(),
              a.col(j));
    if (!library.names().empty()) names.push_back(library.names()[picks[j]]);
  }

  // Pure blocks, then the smoothing filter mixes materials along block
  // borders.
  const std::size_t blocks_x = (spec.width + spec.block_size - 1) / spec.block_size;
  const std::size_t blocks_y = (spec.height + spec.block_size - 1) / spec.block_size;
  std::vector<std::size_t> block_label(blocks_x * blocks_y);
  for (auto& b : block_label) b = rng.index(c);

  std::vector<std::vector<double>> planes(c, std::vector<double>(n, 0.0));
  for (std::size_t y = 0; y < spec.height; ++y) {
    for (std::size_t x = 0; x < spec.width; ++x) {
      const std::size_t b =
          (y / spec.block_size) * blocks_x + (x / spec.block_size);
      planes[block_label[b]][y * spec.width + x] = 1.0;
    }
  }
  for (auto& plane : planes) {
    plane = mean_filter(plane, spec.width, spec.height, spec.filter_size);
  }

  Matrix s(c, n);
  for (std::size_t k = 0; k < n; ++k) {
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) sum += planes[j][k];
    // The filter preserves the per-pixel sum of 1; renormalize anyway
    // against accumulated rounding.
    for (std::size_t j = 0; j < c; ++j) s(j, k) = planes[j][k] / sum;
    double peak = 0.0;
    for (std::size_t j = 0; j < c; ++j) peak = std::max(peak, s(j, k));
    if (peak > spec.purity_threshold) {
      const double uniform = 1.0 / static_cast<double>(c);
      for (std::size_t j = 0; j < c; ++j) s(j, k) = uniform;
    }
  }

  Matrix clean = linalg::matmul(a, s);
  HsiCube clean_cube(std::move(clean), spec.width, spec.height);
  HsiCube noisy = add_noise(clean_cube, spec.snr_db, spec.seed);

  std::vector<std::string> scene_names = names;
  return Scene{std::move(noisy),
               std::move(clean_cube),
               SignatureMatrix(std::move(a), std::move(names)),
               AbundanceMatrix(std::move(s)),
               std::vector<std::size_t>(picks.begin(), picks.end()),
               std::move(scene_names)};
}

HsiCube add_noise(const HsiCube& cube, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db)) {
    return cube;
  }
  const auto& ker = kernels::active();
  const double signal = std::sqrt(linalg::frobenius_sq(cube.data()));
  if (signal == 0.0) throw ArgumentError("add_noise: cube is identically zero");

  Matrix noisy = cube.data();
  Matrix noise(noisy.rows(), noisy.cols());
  Rng rng(seed);
  for (std::size_t i = 0; i < noise.size(); ++i) noise.data()[i] = rng.normal();
  const double scale =
      signal / (std::sqrt(ker.nrm2sq(noise.data(), noise.size())) *
                std::pow(10.0, snr_db / 20.0));
  ker.axpy(scale, noise.data(), noisy.data(), noisy.size());
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    if (noisy.data()[i] < 0.0) noisy.data()[i] = 0.0;
  }
  return HsiCube(std::move(noisy), cube.width(), cube.height(),
                 cube.wavelengths(), cube.band_mask());
}

SignatureMatrix load_library(const std::string& path,
                             std::vector<double>* wavelengths) {
  std::ifstream in(path);
  if (!in) throw IoError("load_library: cannot open " + path);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw ParseError("load_library: " + path + ": empty file");
  }
  ++line_no;
  // Header: wavelength column then material names.
  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      if (first) {
        first = false;
        continue;
      }
      names.push_back(cell);
    }
  }
  if (names.empty()) {
    throw ParseError("load_library: " + path + ":1: header has no spectra");
  }

  std::vector<double> wl;
  std::vector<double> values;  // row-major bands x materials
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      double v;
      try {
        v = std::stod(cell);
      } catch (const std::exception&) {
        throw ParseError("load_library: " + path + ":" + std::to_string(line_no) +
                         ": cannot parse '" + cell + "'");
      }
      if (col == 0) {
        wl.push_back(v);
      } else {
        values.push_back(v);
      }
      ++col;
    }
    if (col != names.size() + 1) {
      throw ParseError("load_library: " + path + ":" + std::to_string(line_no) +
                       ": expected " + std::to_string(names.size() + 1) +
                       " columns, found " + std::to_string(col));
    }
  }
  if (wl.empty()) {
    throw ParseError("load_library: " + path + ": no spectra");
  }

  const std::size_t bands = wl.size();
  Matrix data(bands, names.size());
  for (std::size_t b = 0; b < bands; ++b) {
    for (std::size_t m = 0; m < names.size(); ++m) {
      data(b, m) = values[b * names.size() + m];
    }
  }
  if (wavelengths) *wavelengths = std::move(wl);
  return SignatureMatrix(std::move(data), std::move(names));
}

}  // namespace unmix::synth
