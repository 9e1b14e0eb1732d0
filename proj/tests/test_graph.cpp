#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "unmix/core.hpp"
#include "unmix/errors.hpp"
#include "unmix/graph.hpp"
#include "unmix/rng.hpp"

using namespace unmix;

TEST_CASE("build_neighborhood: grid combinatorics") {
  SUBCASE("1x1 grid has a single node with no neighbors") {
    const auto nb = graph::build_neighborhood(1, 1, 4);
    REQUIRE(nb.size() == 1);
    CHECK(nb[0].empty());
  }
  SUBCASE("3x3 grid, 4-connected") {
    const auto nb = graph::build_neighborhood(3, 3, 4);
    CHECK(nb[4].size() == 4);  // center
    CHECK(nb[0].size() == 2);  // corner
    CHECK(nb[1].size() == 3);  // edge
  }
  SUBCASE("3x3 grid, 8-connected") {
    const auto nb = graph::build_neighborhood(3, 3, 8);
    CHECK(nb[4].size() == 8);
    CHECK(nb[0].size() == 3);
  }
  SUBCASE("zero-sized grid is rejected") {
    CHECK_THROWS_AS(graph::build_neighborhood(0, 3, 4), ArgumentError);
  }
}

TEST_CASE("build_neighborhood is symmetric and has no self loops") {
  for (const int conn : {4, 8}) {
    const auto nb = graph::build_neighborhood(5, 4, conn);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      for (const std::size_t j : nb[k]) {
        CHECK(j != k);
        CHECK(std::count(nb[j].begin(), nb[j].end(), k) == 1);
      }
    }
  }
}

TEST_CASE("cosine_similarity basics") {
  CHECK(graph::cosine_similarity({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) ==
        doctest::Approx(1.0));
  CHECK(graph::cosine_similarity({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(0.0));
  CHECK(graph::cosine_similarity({1.0, 0.0}, {1.0, 1.0}) ==
        doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(graph::cosine_similarity({0.0, 0.0}, {1.0, 1.0}), NumericError);
}

TEST_CASE("compute_rho: identical pixels give uniform rows that sum to 1") {
  Matrix data(3, 9, 0.5);
  HsiCube cube(data, 3, 3);
  const auto nb = graph::build_neighborhood(3, 3, 4);
  const auto rho = graph::compute_rho(cube, nb);
  for (std::size_t k = 0; k < 9; ++k) {
    double sum = 0.0;
    for (const double w : rho[k]) {
      CHECK(w == doctest::Approx(1.0 / static_cast<double>(nb[k].size())));
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("compute_rho: single neighbor gets weight 1") {
  Matrix data(2, 2);
  data(0, 0) = 1.0;
  data(1, 0) = 0.2;
  data(0, 1) = 0.4;
  data(1, 1) = 0.7;
  HsiCube cube(data, 2, 1);
  const auto nb = graph::build_neighborhood(2, 1, 4);
  const auto rho = graph::compute_rho(cube, nb);
  REQUIRE(rho[0].size() == 1);
  CHECK(rho[0][0] == doctest::Approx(1.0));
}

TEST_CASE("compute_rho: hand-computed 1x3 scene") {
  // Pixels [1,0], [1,0], [0,1]: middle pixel is identical to the left one
  // and orthogonal to the right one, so its weights are [1, 0].
  Matrix data(2, 3);
  data(0, 0) = 1.0;
  data(0, 1) = 1.0;
  data(1, 2) = 1.0;
  HsiCube cube(data, 3, 1);
  const auto nb = graph::build_neighborhood(3, 1, 4);
  const auto rho = graph::compute_rho(cube, nb);
  REQUIRE(nb[1].size() == 2);
  REQUIRE(nb[1][0] == 0);
  CHECK(rho[1][0] == doctest::Approx(1.0));
  CHECK(rho[1][1] == doctest::Approx(0.0));
}

TEST_CASE("rho is invariant to positive per-pixel scaling") {
  Rng rng(17);
  Matrix data(4, 12);
  for (std::size_t i = 0; i < data.size(); ++i) data.data()[i] = rng.uniform(0.1, 1.0);
  HsiCube cube(data, 4, 3);
  const auto nb = graph::build_neighborhood(4, 3, 8);
  const auto rho1 = graph::compute_rho(cube, nb);

  Matrix scaled = data;
  for (std::size_t k = 0; k < 12; ++k) {
    const double f = rng.uniform(0.5, 3.0);
    for (std::size_t b = 0; b < 4; ++b) scaled(b, k) *= f;
  }
  HsiCube cube2(scaled, 4, 3);
  const auto rho2 = graph::compute_rho(cube2, nb);
  for (std::size_t k = 0; k < 12; ++k) {
    for (std::size_t j = 0; j < rho1[k].size(); ++j) {
      CHECK(rho2[k][j] == doctest::Approx(rho1[k][j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("compute_rho falls back to uniform weights on a zero denominator") {
  // A pixel whose only neighbors are orthogonal to it has similarity sum 0.
  Matrix data(2, 2);
  data(0, 0) = 1.0;
  data(1, 1) = 1.0;
  HsiCube cube(data, 2, 1);
  const auto nb = graph::build_neighborhood(2, 1, 4);
  std::vector<std::string> warnings;
  const auto rho = graph::compute_rho(cube, nb, &warnings);
  CHECK(rho[0][0] == doctest::Approx(1.0));
  CHECK(rho[1][0] == doctest::Approx(1.0));
  CHECK(warnings.size() == 2);
}

TEST_CASE("effective_neighbors honors cluster labels") {
  Matrix data(2, 9, 0.3);
  HsiCube cube(data, 3, 3);

  SUBCASE("single cluster keeps the whole neighborhood") {
    auto g = graph::build(cube, 4);
    for (std::size_t k = 0; k < 9; ++k) {
      CHECK(graph::effective_neighbors(g, k) == g.neighbors[k]);
    }
  }
  SUBCASE("all-distinct labels empty every neighborhood") {
    std::vector<int> labels(9);
    for (int i = 0; i < 9; ++i) labels[i] = i;
    auto g = graph::build(cube, 4, labels);
    for (std::size_t k = 0; k < 9; ++k) {
      CHECK(graph::effective_neighbors(g, k).empty());
    }
  }
  SUBCASE("checkerboard labels on 4-connectivity isolate every pixel") {
    // On a 4-connected grid every neighbor flips parity, so the
    // cluster-restricted neighborhood is empty everywhere, which the
    // adjacency oracle below confirms.
    std::vector<int> labels(9);
    for (std::size_t y = 0; y < 3; ++y) {
      for (std::size_t x = 0; x < 3; ++x) labels[y * 3 + x] = (x + y) % 2;
    }
    auto g = graph::build(cube, 4, labels);
    for (std::size_t k = 0; k < 9; ++k) {
      const auto eff = graph::effective_neighbors(g, k);
      CHECK(eff.empty());
      // Independent adjacency oracle: |x1-x2|+|y1-y2| == 1 implies
      // different parity.
      for (const std::size_t j : g.neighbors[k]) {
        const auto [x1, y1] = std::pair{k % 3, k / 3};
        const auto [x2, y2] = std::pair{j % 3, j / 3};
        CHECK((x1 + y1) % 2 != (x2 + y2) % 2);
      }
    }
  }
  SUBCASE("effective neighborhood is a cluster-homogeneous subset") {
    std::vector<int> labels{0, 0, 1, 0, 1, 1, 0, 1, 0};
    auto g = graph::build(cube, 8, labels);
    for (std::size_t k = 0; k < 9; ++k) {
      for (const std::size_t j : graph::effective_neighbors(g, k)) {
        CHECK(g.labels[j] == g.labels[k]);
        CHECK(std::count(g.neighbors[k].begin(), g.neighbors[k].end(), j) == 1);
      }
    }
  }
}

TEST_CASE("graph csv dump emits one row per edge") {
  Matrix data(2, 4, 0.3);
  HsiCube cube(data, 2, 2);
  auto g = graph::build(cube, 4);
  const std::string path = "graph_dump_test.csv";
  graph::dump_csv(g, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::size_t rows = 0;
  std::getline(in, line);
  CHECK(line == "pixel,neighbor,rho");
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 8);  // 2x2 grid, 4-connected: 4 undirected edges, both ways
  std::remove(path.c_str());
}
