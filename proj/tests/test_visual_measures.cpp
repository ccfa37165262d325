#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "lensrank/lensrank.hpp"
#include "oracles.hpp"
#include "support.hpp"

using lensrank::IndexScore;
using lensrank::View2D;
using testsupport::view_from;

TEST_CASE("lda index is one when the classes share a cloud") {
  std::vector<std::array<double, 2>> cloud;
  lensrank::rng64 rng(17);
  for (int i = 0; i < 12; ++i) cloud.push_back({rng.uniform01(), rng.uniform01()});
  std::vector<std::array<double, 2>> pts;
  std::vector<int> labels;
  for (const auto& p : cloud) {
    pts.push_back(p);
    labels.push_back(0);
  }
  for (const auto& p : cloud) {
    pts.push_back(p);
    labels.push_back(1);
  }
  IndexScore s = lensrank::lda_index(view_from(pts, labels));
  REQUIRE_FALSE(s.degenerate);
  CHECK(s.value == 1.0);
}

TEST_CASE("lda index drops for well separated blobs") {
  IndexScore s = lensrank::lda_index(testsupport::separated_blobs(5, 20));
  REQUIRE_FALSE(s.degenerate);
  CHECK(s.value < 0.1);
}

TEST_CASE("lda index degeneracies") {
  IndexScore mono = lensrank::lda_index(testsupport::random_view(9, 10, 1));
  CHECK(mono.degenerate);
  CHECK(mono.value == 1.0);
  CHECK_THAT(mono.reason, Catch::Matchers::ContainsSubstring("fewer than 2"));

  std::vector<std::array<double, 2>> line;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    double t = 0.1 * i;
    line.push_back({t, t});
    labels.push_back(i % 2);
  }
  IndexScore collinear = lensrank::lda_index(view_from(line, labels));
  CHECK(collinear.degenerate);
  CHECK(collinear.value == 1.0);
  CHECK_THAT(collinear.reason, Catch::Matchers::ContainsSubstring("singular"));
}

TEST_CASE("ccm hand case with one planted intruder") {
  View2D v = view_from({{0.0, 0.0}, {1.0, 0.0}, {0.6, 0.0}}, {0, 0, 1});
  IndexScore s = lensrank::ccm(v);
  REQUIRE_FALSE(s.degenerate);
  CHECK(s.value == 1.0 - 2.0 / 3.0);
}

TEST_CASE("ccm counts everything inconsistent when centroids coincide") {
  View2D v = view_from({{0.0, 0.0}, {2.0, 0.0}, {1.0, 1.0}, {1.0, -1.0}},
                       {0, 0, 1, 1});
  IndexScore s = lensrank::ccm(v);
  REQUIRE_FALSE(s.degenerate);
  CHECK(s.value == 1.0);
}

TEST_CASE("ccm is zero for separated blobs and degenerate for one class") {
  IndexScore s = lensrank::ccm(testsupport::separated_blobs(19, 15));
  REQUIRE_FALSE(s.degenerate);
  CHECK(s.value == 0.0);

  IndexScore mono = lensrank::ccm(testsupport::random_view(21, 8, 1));
  CHECK(mono.degenerate);
  CHECK_THAT(mono.reason, Catch::Matchers::ContainsSubstring("fewer than 2"));
}

TEST_CASE("hdm2d equals 0.25 when eight sites each hold a mixed pair") {
  const std::vector<std::array<double, 2>> sites = {
      {0.05, 0.05}, {0.3, 0.1},  {0.55, 0.2}, {0.9, 0.15},
      {0.1, 0.6},   {0.4, 0.8},  {0.7, 0.65}, {0.95, 0.9}};
  std::vector<std::array<double, 2>> pts;
  std::vector<int> labels;
  for (const auto& p : sites) {
    pts.push_back(p);
    labels.push_back(0);
    pts.push_back(p);
    labels.push_back(1);
  }
  IndexScore s = lensrank::hdm2d(view_from(pts, labels), 100);
  REQUIRE_FALSE(s.degenerate);
  CHECK(s.value == Catch::Approx(0.25).margin(1e-12));
}

TEST_CASE("hdm2d equals 0.25 for two opposite corners on a 3x3 grid") {
  View2D v = view_from({{0.1, 0.1}, {0.9, 0.9}}, {0, 1});
  IndexScore s = lensrank::hdm2d(v, 3);
  REQUIRE_FALSE(s.degenerate);
  CHECK(s.value == Catch::Approx(0.25).margin(1e-12));
}

TEST_CASE("hdm2d is zero for far apart pure blobs") {
  IndexScore s = lensrank::hdm2d(testsupport::separated_blobs(23, 20), 100);
  REQUIRE_FALSE(s.degenerate);
  CHECK(s.value == 0.0);
}

TEST_CASE("hdm2d degeneracies and histogram validation") {
  IndexScore one = lensrank::hdm2d(view_from({{0.5, 0.5}}, {0}), 10);
  CHECK(one.degenerate);
  CHECK_THAT(one.reason, Catch::Matchers::ContainsSubstring("at least 2"));

  CHECK_THROWS_WITH(lensrank::build_histogram(view_from({{0.0, 0.0}}, {0}), 0),
                    Catch::Matchers::ContainsSubstring("at least 1 bin"));
}

TEST_CASE("visual measures agree with independent reimplementations") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    std::size_t n = 4 + static_cast<std::size_t>(seed % 40);
    std::size_t k = 1 + static_cast<std::size_t>(seed % 4);
    View2D v = testsupport::random_view(seed + 500, n, k);
    INFO("seed " << seed << " n " << n << " classes " << k);

    IndexScore lda = lensrank::lda_index(v);
    oracles::OracleScore olda = oracles::lda_index(v);
    CHECK(lda.degenerate == olda.degenerate);
    if (!lda.degenerate)
      CHECK(lda.value == Catch::Approx(olda.value).margin(1e-12));

    IndexScore c = lensrank::ccm(v);
    oracles::OracleScore oc = oracles::ccm(v);
    CHECK(c.degenerate == oc.degenerate);
    if (!c.degenerate) CHECK(c.value == oc.value);

    IndexScore h = lensrank::hdm2d(v, 10);
    oracles::OracleScore oh = oracles::hdm2d(v, 10);
    CHECK(h.degenerate == oh.degenerate);
    if (!h.degenerate) CHECK(h.value == Catch::Approx(oh.value).margin(1e-12));
    if (!h.degenerate) {
      CHECK(h.value >= 0.0);
      CHECK(h.value <= 1.0);
    }
  }
}

TEST_CASE("within plus between scatter reproduces the total scatter") {
  View2D v = testsupport::random_view(99, 35, 3);
  lensrank::ScatterMatrices s = lensrank::scatter_matrices(v);
  double t00 = 0.0, t01 = 0.0, t11 = 0.0;
  double gx = 0.0, gy = 0.0;
  for (const auto& p : v.points) {
    gx += p[0];
    gy += p[1];
  }
  gx /= static_cast<double>(v.n_points());
  gy /= static_cast<double>(v.n_points());
  for (const auto& p : v.points) {
    double dx = p[0] - gx;
    double dy = p[1] - gy;
    t00 += dx * dx;
    t01 += dx * dy;
    t11 += dy * dy;
  }
  CHECK(s.w[0][0] + s.b[0][0] == Catch::Approx(t00).margin(1e-9));
  CHECK(s.w[0][1] + s.b[0][1] == Catch::Approx(t01).margin(1e-9));
  CHECK(s.w[1][1] + s.b[1][1] == Catch::Approx(t11).margin(1e-9));
}
