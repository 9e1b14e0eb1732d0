#include "unmix/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "unmix/errors.hpp"

namespace unmix::io {

namespace {

std::vector<int> expand_ranges(
    const std::vector<std::pair<int, int>>& ranges) {
  std::vector<int> out;
  for (const auto& [lo, hi] : ranges) {
    for (int i = lo; i <= hi; ++i) out.push_back(i);
  }
  return out;
}

}  // namespace

const BandRemovalPreset& preset_cuprite() {
  static const BandRemovalPreset p{
      "cuprite", 224,
      expand_ranges({{1, 2}, {104, 113}, {148, 167}, {221, 224}})};
  return p;
}

const BandRemovalPreset& preset_urban() {
  static const BandRemovalPreset p{
      "urban", 210,
      expand_ranges({{1, 4}, {76, 76}, {87, 87}, {101, 111}, {136, 153}, {198, 210}})};
  return p;
}

const BandRemovalPreset& preset_none() {
  static const BandRemovalPreset p{"none", 0, {}};
  return p;
}

const BandRemovalPreset& preset_by_name(const std::string& name) {
  if (name == "cuprite") return preset_cuprite();
  if (name == "urban") return preset_urban();
  if (name == "none") return preset_none();
  throw ArgumentError("unknown band-removal preset '" + name + "'");
}

std::vector<std::size_t> to_zero_based(const std::vector<int>& one_based) {
  std::vector<std::size_t> out;
  out.reserve(one_based.size());
  for (const int i : one_based) {
    if (i < 1) throw ArgumentError("band index " + std::to_string(i) +
                                   " is not 1-based");
    out.push_back(static_cast<std::size_t>(i - 1));
  }
  return out;
}

namespace {

struct EnviHeader {
  std::size_t samples = 0, lines = 0, bands = 0;
  std::string interleave;
  int data_type = 0;
  int byte_order = 0;
  double reflectance_scale = 0.0;
  std::vector<double> wavelengths;
  std::string wavelength_units;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

EnviHeader parse_envi_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_envi: cannot open header " + path);
  EnviHeader h;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = lower(trim(line.substr(0, eq)));
    std::string value = trim(line.substr(eq + 1));
    // Brace-delimited values may span lines.
    if (!value.empty() && value.front() == '{') {
      while (value.find('}') == std::string::npos && std::getline(in, line)) {
        value += " " + trim(line);
      }
      value = trim(value.substr(1, value.find('}') - 1));
    }
    if (key == "samples") h.samples = std::stoul(value);
    else if (key == "lines") h.lines = std::stoul(value);
    else if (key == "bands") h.bands = std::stoul(value);
    else if (key == "interleave") h.interleave = lower(value);
    else if (key == "data type") h.data_type = std::stoi(value);
    else if (key == "byte order") h.byte_order = std::stoi(value);
    else if (key == "reflectance scale factor") h.reflectance_scale = std::stod(value);
    else if (key == "wavelength units") h.wavelength_units = lower(value);
    else if (key == "wavelength") {
      std::stringstream ss(value);
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        const std::string t = trim(cell);
        if (!t.empty()) h.wavelengths.push_back(std::stod(t));
      }
    }
  }
  if (h.samples == 0 || h.lines == 0 || h.bands == 0) {
    throw ParseError("read_envi: header " + path +
                     " is missing samples/lines/bands");
  }
  if (h.interleave != "bsq" && h.interleave != "bil" && h.interleave != "bip") {
    throw ParseError("read_envi: unsupported or missing interleave '" +
                     h.interleave + "'");
  }
  if (h.data_type != 4 && h.data_type != 12) {
    throw ParseError("read_envi: unsupported data type " +
                     std::to_string(h.data_type) + " (want 4=float32 or 12=uint16)");
  }
  return h;
}

std::string find_envi_binary(const std::string& header_path) {
  namespace fs = std::filesystem;
  fs::path hdr(header_path);
  std::vector<fs::path> candidates;
  fs::path stem = hdr;
  stem.replace_extension();
  candidates.push_back(stem);
  for (const char* ext : {".img", ".dat", ".raw", ".bsq", ".bil", ".bip"}) {
    fs::path p = stem;
    p += ext;
    candidates.push_back(p);
  }
  for (const auto& c : candidates) {
    if (fs::exists(c) && fs::is_regular_file(c)) return c.string();
  }
  throw IoError("read_envi: no binary file found next to " + header_path);
}

template <typename T>
T swap_bytes(T v) {
  auto bytes = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(v);
  std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

}  // namespace

HsiCube read_envi(const std::string& header_path, double reflectance_scale,
                  std::size_t* clamped) {
  const EnviHeader h = parse_envi_header(header_path);
  const std::string bin_path = find_envi_binary(header_path);

  const std::size_t n = h.samples * h.lines;
  const std::size_t values = n * h.bands;
  const std::size_t elem = h.data_type == 4 ? 4 : 2;

  std::ifstream in(bin_path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("read_envi: cannot open " + bin_path);
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size != values * elem) {
    throw ParseError("read_envi: " + bin_path + " holds " + std::to_string(size) +
                     " bytes, header implies " + std::to_string(values * elem));
  }
  in.seekg(0);
  std::vector<char> raw(size);
  in.read(raw.data(), static_cast<std::streamsize>(size));
  if (!in) throw IoError("read_envi: short read from " + bin_path);

  const bool host_little = std::endian::native == std::endian::little;
  const bool file_little = h.byte_order == 0;
  const bool need_swap = host_little != file_little;

  double scale = reflectance_scale;
  if (h.data_type == 12) {
    if (scale == 0.0) scale = h.reflectance_scale;
    if (scale == 0.0) {
      throw ParseError(
          "read_envi: uint16 data needs a reflectance scale factor (header "
          "or flag)");
    }
  }

  Matrix data(h.bands, n);
  std::size_t clamp_count = 0;
  auto put = [&](std::size_t band, std::size_t pixel, double v) {
    if (v < 0.0) {
      v = 0.0;
      ++clamp_count;
    }
    data(band, pixel) = v;
  };
  auto fetch = [&](std::size_t flat) -> double {
    if (h.data_type == 4) {
      float f;
      std::memcpy(&f, raw.data() + flat * 4, 4);
      if (need_swap) f = swap_bytes(f);
      return static_cast<double>(f);
    }
    std::uint16_t u;
    std::memcpy(&u, raw.data() + flat * 2, 2);
    if (need_swap) u = swap_bytes(u);
    return static_cast<double>(u) / scale;
  };

  std::size_t flat = 0;
  if (h.interleave == "bsq") {
    for (std::size_t b = 0; b < h.bands; ++b) {
      for (std::size_t p = 0; p < n; ++p) put(b, p, fetch(flat++));
    }
  } else if (h.interleave == "bil") {
    for (std::size_t line = 0; line < h.lines; ++line) {
      for (std::size_t b = 0; b < h.bands; ++b) {
        for (std::size_t s = 0; s < h.samples; ++s) {
          put(b, line * h.samples + s, fetch(flat++));
        }
      }
    }
  } else {  // bip
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t b = 0; b < h.bands; ++b) put(b, p, fetch(flat++));
    }
  }
  if (clamped) *clamped = clamp_count;

  std::vector<double> wl;
  if (h.wavelengths.size() == h.bands) {
    wl = h.wavelengths;
    if (h.wavelength_units.find("nano") != std::string::npos) {
      for (auto& w : wl) w /= 1000.0;  // nm -> um
    }
    // Drop a non-increasing list rather than fail the cube invariant.
    for (std::size_t i = 1; i < wl.size(); ++i) {
      if (!(wl[i] > wl[i - 1])) {
        wl.clear();
        break;
      }
    }
  }
  return HsiCube(std::move(data), h.samples, h.lines, std::move(wl));
}

HsiCube apply_band_removal(const HsiCube& cube, const BandRemovalPreset& preset) {
  if (preset.removed.empty()) return cube;
  if (cube.bands() != preset.original_bands) {
    throw ArgumentError("apply_band_removal: preset '" + preset.name + "' expects " +
                        std::to_string(preset.original_bands) + " bands, cube has " +
                        std::to_string(cube.bands()));
  }
  std::vector<bool> drop(cube.bands(), false);
  for (const std::size_t z : to_zero_based(preset.removed)) {
    if (z >= cube.bands()) {
      throw ArgumentError("apply_band_removal: band index out of range");
    }
    drop[z] = true;
  }
  std::vector<std::size_t> keep;
  for (std::size_t b = 0; b < cube.bands(); ++b) {
    if (!drop[b]) keep.push_back(b);
  }

  Matrix out(keep.size(), cube.pixels());
  for (std::size_t p = 0; p < cube.pixels(); ++p) {
    const double* src = cube.pixel(p);
    double* dst = out.col(p);
    for (std::size_t i = 0; i < keep.size(); ++i) dst[i] = src[keep[i]];
  }
  std::vector<double> wl;
  if (cube.has_wavelengths()) {
    for (const std::size_t b : keep) wl.push_back(cube.wavelengths()[b]);
  }
  std::vector<int> mask;
  mask.reserve(keep.size());
  for (const std::size_t b : keep) mask.push_back(static_cast<int>(b + 1));
  return HsiCube(std::move(out), cube.width(), cube.height(), std::move(wl),
                 std::move(mask));
}

namespace {

constexpr char kMagic[4] = {'U', 'M', 'T', 'X'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_le(std::ofstream& out, T v) {
  if constexpr (sizeof(T) > 1) {
    if (std::endian::native == std::endian::big) v = swap_bytes(v);
  }
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if constexpr (sizeof(T) > 1) {
    if (std::endian::native == std::endian::big) v = swap_bytes(v);
  }
  return v;
}

}  // namespace

void write_matrix(const std::string& path, const Matrix& m) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("write_matrix: cannot open " + tmp);
    out.write(kMagic, 4);
    write_le<std::uint32_t>(out, kVersion);
    write_le<std::uint64_t>(out, m.rows());
    write_le<std::uint64_t>(out, m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) write_le<double>(out, m(r, c));
    }
    if (!out) throw IoError("write_matrix: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Matrix read_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_matrix: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError("read_matrix: " + path + ": bad magic");
  }
  const auto version = read_le<std::uint32_t>(in);
  if (version != kVersion) {
    throw ParseError("read_matrix: " + path + ": unsupported version " +
                     std::to_string(version));
  }
  const auto rows = read_le<std::uint64_t>(in);
  const auto cols = read_le<std::uint64_t>(in);
  if (!in) throw ParseError("read_matrix: " + path + ": truncated header");
  Matrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      m(r, c) = read_le<double>(in);
    }
  }
  if (!in) throw ParseError("read_matrix: " + path + ": truncated payload");
  return m;
}

void write_pgm(const std::string& path, const double* values, std::size_t width,
               std::size_t height, double lo, double hi) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("write_pgm: cannot open " + tmp);
    out << "P5\n" << width << " " << height << "\n255\n";
    const double span = hi > lo ? hi - lo : 1.0;
    for (std::size_t i = 0; i < width * height; ++i) {
      const double t = (values[i] - lo) / span;
      const int v = static_cast<int>(std::lround(std::clamp(t, 0.0, 1.0) * 255.0));
      out.put(static_cast<char>(v));
    }
    if (!out) throw IoError("write_pgm: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("write_text_atomic: cannot open " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write_text_atomic: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace unmix::io
