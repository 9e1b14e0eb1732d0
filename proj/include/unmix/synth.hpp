#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unmix/core.hpp"

namespace unmix::synth {

struct SynthSpec {
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t endmembers = 6;
  std::size_t block_size = 8;
  std::size_t filter_size = 7;     // odd
  double purity_threshold = 0.8;   // max allowed single abundance
  double snr_db = 25.0;            // infinity = noiseless
  std::uint64_t seed = 0;

  void validate(std::size_t library_count) const;
};

struct Scene {
  HsiCube noisy;
  HsiCube clean;
  SignatureMatrix a_true;
  AbundanceMatrix s_true;
  std::vector<std::size_t> library_indices;
  std::vector<std::string> endmember_names;
};

// Block abundance maps smoothed by a uniform mean filter (mirror-padded),
// renormalized to the simplex, overly pure pixels replaced by the uniform
// mixture, mixed through the selected signatures, then noised to the
// requested SNR.
Scene generate_scene(const SynthSpec& spec, const SignatureMatrix& library);

// White Gaussian noise scaled so the pre-clamp Frobenius SNR is exactly
// snr_db; negative reflectances are clamped at zero afterwards. An
// infinite snr_db returns the cube unchanged.
HsiCube add_noise(const HsiCube& cube, double snr_db, std::uint64_t seed);

// Spectral library CSV: header "wavelength,<name>,...", one row per band.
SignatureMatrix load_library(const std::string& path,
                             std::vector<double>* wavelengths = nullptr);

}  // namespace unmix::synth
