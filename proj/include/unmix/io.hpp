#pragma once

#include <string>
#include <vector>

#include "unmix/core.hpp"

namespace unmix::io {

// Water-vapor / low-SNR band removal lists for the two reference sensors,
// 1-based original band indices as published.
struct BandRemovalPreset {
  std::string name;
  std::size_t original_bands = 0;
  std::vector<int> removed;  // 1-based, sorted
};

const BandRemovalPreset& preset_cuprite();  // 224 -> 188 bands
const BandRemovalPreset& preset_urban();    // 210 -> 162 bands
const BandRemovalPreset& preset_none();
const BandRemovalPreset& preset_by_name(const std::string& name);

// The one audited 1-based <-> 0-based conversion.
std::vector<std::size_t> to_zero_based(const std::vector<int>& one_based);

// ENVI header/binary pair -> canonical band-major cube. Supports bsq, bil,
// bip interleaves; data types 4 (float32) and 12 (uint16, divided by the
// reflectance scale factor from the header or the scale argument). Negative
// float values are clamped to zero (counted in *clamped when given).
HsiCube read_envi(const std::string& header_path, double reflectance_scale = 0.0,
                  std::size_t* clamped = nullptr);

HsiCube apply_band_removal(const HsiCube& cube, const BandRemovalPreset& preset);

// Portable matrix container: "UMTX", u32 version, u64 rows, u64 cols,
// float64 row-major payload, all little-endian. Round-trips bit-exactly.
void write_matrix(const std::string& path, const Matrix& m);
Matrix read_matrix(const std::string& path);

// 8-bit binary PGM with values mapped linearly from [lo, hi] to [0, 255].
void write_pgm(const std::string& path, const double* values, std::size_t width,
               std::size_t height, double lo, double hi);

// Write-to-temp-then-rename text write used for reports and manifests.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace unmix::io
