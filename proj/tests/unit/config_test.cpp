#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "varbif/config.hpp"
#include "varbif/errors.hpp"
#include "varbif/numfmt.hpp"

using namespace varbif;

namespace {

ProblemConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.cfg");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("builtin with parameters and tolerances") {
  const ProblemConfig c = parse(
      "# comment\n"
      "problem = pitchfork\n"
      "domain = interval 0 pi\n"
      "resolution = 128\n"
      "param.c = 2   # trailing\n"
      "kernel_tol = 1e-9\n"
      "ball_radius = 0.5\n");
  CHECK(c.problem == "pitchfork");
  REQUIRE(c.domain.has_value());
  CHECK(c.domain->hi[0] == doctest::Approx(std::numbers::pi));
  CHECK((*c.resolution)[0] == 128);
  CHECK(c.params.at("c") == 2.0);
  CHECK(*c.kernel_tol == 1e-9);
  CHECK(*c.ball_radius == 0.5);
  CHECK(make_problem(c).symmetry == Symmetry::odd);
}

TEST_CASE("polynomial problem") {
  const ProblemConfig c = parse(
      "problem = polynomial\n"
      "domain = rectangle 0 pi 0 pi\n"
      "resolution = 16 12\n"
      "symmetry = odd\n"
      "F.poly = 0 0 0 0 0.25\n"
      "K.poly = 0 0 0.5\n");
  CHECK((*c.resolution)[1] == 12);
  const ProblemSpec spec = make_problem(c);
  CHECK(spec.domain.dimension() == 2);
}

TEST_CASE("errors carry the source and line") {
  CHECK(error_of("problem = pitchfork\nbogus = 3\n").find("test.cfg:2") != std::string::npos);
  CHECK(error_of("problem = pitchfork\nbogus = 3\n").find("bogus") != std::string::npos);
  CHECK(error_of("problem = pitchfork\nproblem = pitchfork\n").find("test.cfg:2") != std::string::npos);
  CHECK(error_of("problem pitchfork\n").find("test.cfg:1") != std::string::npos);
  CHECK_FALSE(error_of("kernel_tol = 1e-2\n").empty());
  CHECK_FALSE(error_of("ball_radius = 0\n").empty());
  CHECK_FALSE(error_of("components = 2\n").empty());
  CHECK_FALSE(error_of("base_state = one\n").empty());
  CHECK_FALSE(error_of("domain = disk 1\n").empty());
  CHECK_FALSE(error_of("resolution = many\n").empty());
}

TEST_CASE("declared odd symmetry is verified") {
  const ProblemConfig c = parse("problem = transcritical\nsymmetry = odd\n");
  CHECK_THROWS_AS(make_problem(c), ConfigError);
}

TEST_CASE("polynomial problems need a domain") {
  CHECK_THROWS_AS(make_problem(parse("problem = polynomial\nK.poly = 0 0 0.5\n")), ConfigError);
}

TEST_CASE("domain parsing") {
  const Domain d = parse_domain("interval 0 2pi");
  CHECK(d.dimension() == 1);
  CHECK(d.hi[0] == doctest::Approx(2 * std::numbers::pi));
  CHECK_THROWS_AS(parse_domain("interval 1 0"), ConfigError);
}

}

TEST_SUITE("numfmt") {

TEST_CASE("round-trip formatting") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(3.0) == "3");
  CHECK(join_doubles({1.5, 2.0}) == "1.5,2");
}

TEST_CASE("real parsing") {
  CHECK(parse_real("2.5") == 2.5);
  CHECK(parse_real("pi") == std::numbers::pi);
  CHECK(parse_real("2pi") == doctest::Approx(2 * std::numbers::pi));
  CHECK(parse_real("0.5*pi") == doctest::Approx(0.5 * std::numbers::pi));
  CHECK_THROWS_AS(parse_real("abc"), ConfigError);
  CHECK_THROWS_AS(parse_real("1.5x"), ConfigError);
  CHECK_THROWS_AS(parse_real(""), ConfigError);
}

}
