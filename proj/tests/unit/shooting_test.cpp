#include <doctest.h>

#include <cmath>
#include <numbers>

#include "varbif_test/shooting.hpp"

using namespace varbif::testing;

TEST_SUITE("shooting oracle") {

TEST_CASE("linear equation: exact end value") {
  // u'' = -u, u'(0) = s gives u(x) = s sin x.
  const double end = shoot_end([](double u) { return -u; }, 1.0, 2.0, 200);
  CHECK(end == doctest::Approx(2.0 * std::sin(1.0)).epsilon(1e-10));
}

TEST_CASE("cubic single hump near onset follows the amplitude law") {
  const double pi = std::numbers::pi;
  for (double lam : {1.01, 1.04}) {
    const auto sol = single_hump([lam](double u) { return u * u * u - lam * u; }, pi, 3.0, 512);
    REQUIRE(sol.has_value());
    CHECK(std::abs(sol->mismatch) <= 1e-10);
    const double peak = sol->values[256];
    CHECK(peak == doctest::Approx(std::sqrt(4.0 * (lam - 1.0) / 3.0)).epsilon(0.03));
    // Symmetric about the midpoint and positive inside.
    for (int k = 1; k < 256; ++k) {
      CHECK(sol->values[k] > 0.0);
      CHECK(std::abs(sol->values[k] - sol->values[512 - k]) <= 1e-8);
    }
  }
}

TEST_CASE("negative slope bound gives the mirrored solution") {
  const double pi = std::numbers::pi;
  auto rhs = [](double u) { return u * u * u - 1.2 * u; };
  const auto up = single_hump(rhs, pi, 3.0, 128);
  const auto down = single_hump(rhs, pi, -3.0, 128);
  REQUIRE(up.has_value());
  REQUIRE(down.has_value());
  for (std::size_t k = 0; k < up->values.size(); ++k) CHECK(up->values[k] == doctest::Approx(-down->values[k]));
}

TEST_CASE("no hump below onset") {
  const auto sol = single_hump([](double u) { return u * u * u - 0.8 * u; }, std::numbers::pi, 3.0, 64);
  CHECK_FALSE(sol.has_value());
}

}
