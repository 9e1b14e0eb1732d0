#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "unmix/core.hpp"
#include "unmix/errors.hpp"
#include "unmix/rng.hpp"

using namespace unmix;

TEST_CASE("forward_model: identity signatures reproduce the abundances") {
  Matrix a(3, 3);
  for (std::size_t i = 0; i < 3; ++i) a(i, i) = 1.0;
  Matrix s = Matrix::from_rows(3, 2, {0.2, 0.5, 0.3, 0.25, 0.5, 0.25});
  const Matrix y = forward_model(SignatureMatrix(a), AbundanceMatrix(s));
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(y.data()[i] == doctest::Approx(s.data()[i]));
  }
}

TEST_CASE("forward_model: single endmember copies its spectrum everywhere") {
  Matrix a = Matrix::from_rows(4, 1, {0.1, 0.4, 0.3, 0.9});
  Matrix s(1, 5, 1.0);
  const Matrix y = forward_model(SignatureMatrix(a), AbundanceMatrix(s));
  for (std::size_t k = 0; k < 5; ++k) {
    for (std::size_t b = 0; b < 4; ++b) CHECK(y(b, k) == doctest::Approx(a(b, 0)));
  }
}

TEST_CASE("forward_model matches the naive triple loop") {
  Rng rng(3);
  Matrix a(4, 3);
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform();
  Matrix s(3, 5);
  for (std::size_t k = 0; k < 5; ++k) {
    const auto col = rng.simplex(3);
    for (std::size_t j = 0; j < 3; ++j) s(j, k) = col[j];
  }
  const Matrix y = forward_model(a, s);
  const Matrix oracle = oracles::naive_matmul(a, s);
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(std::fabs(y.data()[i] - oracle.data()[i]) < 1e-12);
  }
}

TEST_CASE("forward_model is linear and preserves nonnegativity") {
  Rng rng(5);
  Matrix a(6, 3);
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform();
  Matrix s1(3, 4), s2(3, 4);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    s1.data()[i] = rng.uniform();
    s2.data()[i] = rng.uniform();
  }
  const double alpha = 0.7, beta = -1.3;
  Matrix mix(3, 4);
  for (std::size_t i = 0; i < mix.size(); ++i) {
    mix.data()[i] = alpha * s1.data()[i] + beta * s2.data()[i];
  }
  const Matrix lhs = forward_model(a, mix);
  const Matrix y1 = forward_model(a, s1);
  const Matrix y2 = forward_model(a, s2);
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    CHECK(lhs.data()[i] ==
          doctest::Approx(alpha * y1.data()[i] + beta * y2.data()[i]).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < y1.size(); ++i) CHECK(y1.data()[i] >= 0.0);
}

TEST_CASE("forward_model rejects mismatched endmember counts") {
  CHECK_THROWS_AS(forward_model(Matrix(4, 3), Matrix(2, 5)), ShapeError);
}

TEST_CASE("validate_abundances flags ASC and ANC violations") {
  SUBCASE("valid column") {
    Matrix s = Matrix::from_rows(2, 1, {0.5, 0.5});
    CHECK(validate_abundances(s).valid());
  }
  SUBCASE("sum above one") {
    Matrix s = Matrix::from_rows(2, 1, {0.7, 0.4});
    const auto rep = validate_abundances(s);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].asc_violated);
    CHECK(!rep.violations[0].anc_violated);
    CHECK(rep.violations[0].sum == doctest::Approx(1.1));
  }
  SUBCASE("negative entry") {
    Matrix s = Matrix::from_rows(2, 1, {1.2, -0.2});
    const auto rep = validate_abundances(s);
    REQUIRE(rep.violations.size() == 1);
    CHECK(rep.violations[0].anc_violated);
  }
}

TEST_CASE("domain types enforce their invariants") {
  CHECK_THROWS_AS(HsiCube(Matrix(3, 4, 1.0), 2, 3), ShapeError);
  CHECK_THROWS_AS(HsiCube(Matrix(3, 0), 0, 0), ArgumentError);

  Matrix neg(2, 2, 1.0);
  neg(0, 0) = -0.5;
  CHECK_THROWS_AS(HsiCube(neg, 2, 1), ArgumentError);

  Matrix bad_wl(2, 2, 1.0);
  CHECK_THROWS_AS(HsiCube(bad_wl, 2, 1, {0.9, 0.5}), ArgumentError);
  CHECK_NOTHROW(HsiCube(Matrix(2, 2, 1.0), 2, 1, {0.5, 0.9}));

  Matrix zero_col(3, 2, 0.0);
  zero_col(0, 0) = 1.0;
  CHECK_THROWS_AS((void)SignatureMatrix{zero_col}, ArgumentError);

  Matrix bad_s = Matrix::from_rows(2, 1, {0.7, 0.4});
  CHECK_THROWS_AS((void)AbundanceMatrix{bad_s}, ArgumentError);
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  SolverConfig bad = cfg;
  bad.mu = -1.0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = cfg;
  bad.q = 2.5;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = cfg;
  bad.clusters = 0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = cfg;
  bad.connectivity = 6;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
}
