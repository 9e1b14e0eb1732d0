#include <doctest.h>

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "unmix/errors.hpp"
#include "unmix/io.hpp"
#include "unmix/rng.hpp"

using namespace unmix;

namespace {

// Byte-level fixture writer, independent of the reader under test.
void write_bytes(const std::string& path, const std::vector<unsigned char>& b) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
}

void push_f32(std::vector<unsigned char>& b, float v) {
  unsigned char raw[4];
  std::memcpy(raw, &v, 4);
  b.insert(b.end(), raw, raw + 4);
}

void write_header(const std::string& path, const std::string& interleave,
                  int data_type, const std::string& extra = "") {
  std::ofstream out(path);
  out << "ENVI\n"
      << "samples = 2\n"
      << "lines = 2\n"
      << "bands = 3\n"
      << "data type = " << data_type << "\n"
      << "interleave = " << interleave << "\n"
      << "byte order = 0\n"
      << extra;
}

// 2x2x3 fixture values, band b / pixel (row-major pixel index p):
// value = b*100 + p  (then scaled to reflectance by /1000).
float fixture_value(std::size_t b, std::size_t p) {
  return static_cast<float>(b * 100 + p) / 1000.0f;
}

}  // namespace

TEST_CASE("read_envi: BSQ float32 fixture matches byte for byte") {
  std::vector<unsigned char> bytes;
  for (std::size_t b = 0; b < 3; ++b) {
    for (std::size_t p = 0; p < 4; ++p) push_f32(bytes, fixture_value(b, p));
  }
  write_bytes("fix_bsq.img", bytes);
  write_header("fix_bsq.hdr", "bsq", 4);

  const auto cube = io::read_envi("fix_bsq.hdr");
  CHECK(cube.bands() == 3);
  CHECK(cube.width() == 2);
  CHECK(cube.height() == 2);
  for (std::size_t b = 0; b < 3; ++b) {
    for (std::size_t p = 0; p < 4; ++p) {
      CHECK(cube.data()(b, p) == static_cast<double>(fixture_value(b, p)));
    }
  }
  std::remove("fix_bsq.img");
  std::remove("fix_bsq.hdr");
}

TEST_CASE("read_envi: BIL and BIP layouts give the same cube as BSQ") {
  std::vector<unsigned char> bsq;
  for (std::size_t b = 0; b < 3; ++b) {
    for (std::size_t p = 0; p < 4; ++p) push_f32(bsq, fixture_value(b, p));
  }
  write_bytes("fix2_bsq.img", bsq);
  write_header("fix2_bsq.hdr", "bsq", 4);

  // BIL: line, band, sample.
  std::vector<unsigned char> bil;
  for (std::size_t line = 0; line < 2; ++line) {
    for (std::size_t b = 0; b < 3; ++b) {
      for (std::size_t s = 0; s < 2; ++s) {
        push_f32(bil, fixture_value(b, line * 2 + s));
      }
    }
  }
  write_bytes("fix2_bil.img", bil);
  write_header("fix2_bil.hdr", "bil", 4);

  // BIP: pixel-major, band fastest.
  std::vector<unsigned char> bip;
  for (std::size_t p = 0; p < 4; ++p) {
    for (std::size_t b = 0; b < 3; ++b) push_f32(bip, fixture_value(b, p));
  }
  write_bytes("fix2_bip.img", bip);
  write_header("fix2_bip.hdr", "bip", 4);

  const auto c1 = io::read_envi("fix2_bsq.hdr");
  const auto c2 = io::read_envi("fix2_bil.hdr");
  const auto c3 = io::read_envi("fix2_bip.hdr");
  for (std::size_t i = 0; i < c1.data().size(); ++i) {
    CHECK(c1.data().data()[i] == c2.data().data()[i]);
    CHECK(c1.data().data()[i] == c3.data().data()[i]);
  }
  for (const char* f : {"fix2_bsq.img", "fix2_bsq.hdr", "fix2_bil.img",
                        "fix2_bil.hdr", "fix2_bip.img", "fix2_bip.hdr"}) {
    std::remove(f);
  }
}

TEST_CASE("read_envi: big-endian byte order is swapped on read") {
  std::vector<unsigned char> bytes;
  for (std::size_t b = 0; b < 3; ++b) {
    for (std::size_t p = 0; p < 4; ++p) {
      unsigned char raw[4];
      const float v = fixture_value(b, p);
      std::memcpy(raw, &v, 4);
      // Fixture written byte-reversed relative to this little-endian host.
      bytes.push_back(raw[3]);
      bytes.push_back(raw[2]);
      bytes.push_back(raw[1]);
      bytes.push_back(raw[0]);
    }
  }
  write_bytes("fix_be.img", bytes);
  {
    std::ofstream out("fix_be.hdr");
    out << "samples = 2\nlines = 2\nbands = 3\ndata type = 4\n"
        << "interleave = bsq\nbyte order = 1\n";
  }
  const auto cube = io::read_envi("fix_be.hdr");
  for (std::size_t b = 0; b < 3; ++b) {
    for (std::size_t p = 0; p < 4; ++p) {
      CHECK(cube.data()(b, p) == static_cast<double>(fixture_value(b, p)));
    }
  }
  std::remove("fix_be.img");
  std::remove("fix_be.hdr");
}

TEST_CASE("read_envi: truncated binary is a size-mismatch error") {
  std::vector<unsigned char> bytes;
  for (std::size_t i = 0; i < 10; ++i) push_f32(bytes, 0.1f);
  write_bytes("fix3.img", bytes);  // needs 12 floats
  write_header("fix3.hdr", "bsq", 4);
  CHECK_THROWS_AS(io::read_envi("fix3.hdr"), ParseError);
  std::remove("fix3.img");
  std::remove("fix3.hdr");
}

TEST_CASE("read_envi: uint16 data wants a scale factor") {
  std::vector<unsigned char> bytes;
  for (std::size_t i = 0; i < 12; ++i) {
    const std::uint16_t v = static_cast<std::uint16_t>(i * 100);
    bytes.push_back(static_cast<unsigned char>(v & 0xFF));
    bytes.push_back(static_cast<unsigned char>(v >> 8));
  }
  write_bytes("fix4.img", bytes);

  SUBCASE("no factor anywhere is an error") {
    write_header("fix4.hdr", "bsq", 12);
    CHECK_THROWS_AS(io::read_envi("fix4.hdr"), ParseError);
  }
  SUBCASE("header factor applies") {
    write_header("fix4.hdr", "bsq", 12, "reflectance scale factor = 10000\n");
    const auto cube = io::read_envi("fix4.hdr");
    CHECK(cube.data()(0, 1) == doctest::Approx(100.0 / 10000.0));
  }
  SUBCASE("flag factor applies") {
    write_header("fix4.hdr", "bsq", 12);
    const auto cube = io::read_envi("fix4.hdr", 1000.0);
    CHECK(cube.data()(0, 1) == doctest::Approx(100.0 / 1000.0));
  }
  std::remove("fix4.img");
  std::remove("fix4.hdr");
}

TEST_CASE("read_envi: missing keys and unsupported types are parse errors") {
  write_bytes("fix5.img", std::vector<unsigned char>(48, 0));
  {
    std::ofstream out("fix5.hdr");
    out << "samples = 2\nlines = 2\n";  // bands missing
  }
  CHECK_THROWS_AS(io::read_envi("fix5.hdr"), ParseError);
  write_header("fix5.hdr", "bsq", 5);  // double not supported
  CHECK_THROWS_AS(io::read_envi("fix5.hdr"), ParseError);
  write_header("fix5.hdr", "weird", 4);
  CHECK_THROWS_AS(io::read_envi("fix5.hdr"), ParseError);
  std::remove("fix5.img");
  std::remove("fix5.hdr");
}

TEST_CASE("band removal presets match the published lists") {
  const auto& cuprite = io::preset_cuprite();
  CHECK(cuprite.original_bands == 224);
  CHECK(cuprite.removed.size() == 224 - 188);

  // Fixture: the retained list written out independently from the ranges.
  std::vector<int> expected_removed;
  for (int b = 1; b <= 2; ++b) expected_removed.push_back(b);
  for (int b = 104; b <= 113; ++b) expected_removed.push_back(b);
  for (int b = 148; b <= 167; ++b) expected_removed.push_back(b);
  for (int b = 221; b <= 224; ++b) expected_removed.push_back(b);
  CHECK(cuprite.removed == expected_removed);

  const auto& urban = io::preset_urban();
  CHECK(urban.original_bands == 210);
  CHECK(urban.removed.size() == 210 - 162);
  std::vector<int> expected_urban;
  for (int b = 1; b <= 4; ++b) expected_urban.push_back(b);
  expected_urban.push_back(76);
  expected_urban.push_back(87);
  for (int b = 101; b <= 111; ++b) expected_urban.push_back(b);
  for (int b = 136; b <= 153; ++b) expected_urban.push_back(b);
  for (int b = 198; b <= 210; ++b) expected_urban.push_back(b);
  CHECK(urban.removed == expected_urban);

  CHECK_THROWS_AS(io::preset_by_name("mars"), ArgumentError);
}

TEST_CASE("apply_band_removal keeps order and records the mask") {
  Rng rng(401);
  Matrix data(224, 6);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data.data()[i] = rng.uniform(0.0, 1.0);
  }
  HsiCube cube(data, 3, 2);
  const auto out = io::apply_band_removal(cube, io::preset_cuprite());
  CHECK(out.bands() == 188);
  CHECK(out.pixels() == 6);
  REQUIRE(out.band_mask().size() == 188);
  CHECK(out.band_mask().front() == 3);  // bands 1 and 2 removed
  CHECK(out.band_mask().back() == 220);
  // Retained values are the original ones, in order.
  for (std::size_t p = 0; p < 6; ++p) {
    for (std::size_t i = 0; i < 188; ++i) {
      const std::size_t orig = static_cast<std::size_t>(out.band_mask()[i] - 1);
      CHECK(out.data()(i, p) == data(orig, p));
    }
  }

  SUBCASE("band count mismatch is rejected") {
    Matrix small(10, 6, 0.5);
    HsiCube small_cube(small, 3, 2);
    CHECK_THROWS_AS(io::apply_band_removal(small_cube, io::preset_cuprite()),
                    ArgumentError);
  }
  SUBCASE("preset none is the identity") {
    const auto same = io::apply_band_removal(cube, io::preset_none());
    CHECK(same.bands() == 224);
  }
}

TEST_CASE("matrix files round-trip bit-exactly") {
  Rng rng(403);
  Matrix m(5, 7);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-4, 4);
  io::write_matrix("roundtrip.mtx", m);
  const Matrix r = io::read_matrix("roundtrip.mtx");
  REQUIRE(r.rows() == 5);
  REQUIRE(r.cols() == 7);
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(std::memcmp(&r.data()[i], &m.data()[i], 8) == 0);
  }
  std::remove("roundtrip.mtx");
}

TEST_CASE("matrix files: empty matrix and corruption") {
  io::write_matrix("empty.mtx", Matrix(0, 0));
  const Matrix e = io::read_matrix("empty.mtx");
  CHECK(e.rows() == 0);
  CHECK(e.cols() == 0);
  std::remove("empty.mtx");

  write_bytes("badmagic.mtx", {'N', 'O', 'P', 'E', 0, 0, 0, 0});
  CHECK_THROWS_AS(io::read_matrix("badmagic.mtx"), ParseError);
  std::remove("badmagic.mtx");

  // Valid magic but truncated payload.
  io::write_matrix("trunc.mtx", Matrix(4, 4, 1.0));
  {
    std::ifstream in("trunc.mtx", std::ios::binary);
    std::vector<char> all((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
    std::ofstream out("trunc.mtx", std::ios::binary | std::ios::trunc);
    out.write(all.data(), static_cast<std::streamsize>(all.size() / 2));
  }
  CHECK_THROWS_AS(io::read_matrix("trunc.mtx"), ParseError);
  std::remove("trunc.mtx");

  CHECK_THROWS_AS(io::read_matrix("missing.mtx"), IoError);
}

TEST_CASE("to_zero_based validates and shifts") {
  CHECK(io::to_zero_based({1, 5, 10}) ==
        std::vector<std::size_t>{0, 4, 9});
  CHECK_THROWS_AS(io::to_zero_based({0}), ArgumentError);
}

TEST_CASE("pgm writer emits a parseable grayscale image") {
  std::vector<double> vals{0.0, 0.5, 1.0, 0.25};
  io::write_pgm("test.pgm", vals.data(), 2, 2, 0.0, 1.0);
  std::ifstream in("test.pgm", std::ios::binary);
  std::string magic;
  in >> magic;
  CHECK(magic == "P5");
  std::size_t w, h, maxv;
  in >> w >> h >> maxv;
  CHECK(w == 2);
  CHECK(h == 2);
  CHECK(maxv == 255);
  in.get();  // single whitespace after the header
  unsigned char px[4];
  in.read(reinterpret_cast<char*>(px), 4);
  CHECK(px[0] == 0);
  CHECK(px[1] == 128);
  CHECK(px[2] == 255);
  CHECK(px[3] == 64);
  std::remove("test.pgm");
}
