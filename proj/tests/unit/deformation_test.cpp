#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "varbif/deformation.hpp"
#include "varbif/errors.hpp"
#include "varbif/problems.hpp"
#include "varbif/spectrum.hpp"

using namespace varbif;

namespace {

constexpr double pi = std::numbers::pi;

std::shared_ptr<const Discretization> disc_for(const ProblemSpec& spec, int resolution) {
  return std::make_shared<const Discretization>(build_grid(spec.domain, resolution), 1);
}

std::vector<double> t_grid(double a, double b, double step) {
  std::vector<double> out;
  for (int k = 0; a + k * step <= b + 1e-12; ++k) out.push_back(a + k * step);
  return out;
}

}  // namespace

TEST_SUITE("deformation") {

TEST_CASE("pullback at t = 1 is the identity") {
  const ProblemSpec spec = builtin("pitchfork").spec;
  const auto disc = disc_for(spec, 32);
  std::mt19937 rng(2);
  std::normal_distribution<double> g(0.0, 0.3);
  Vector u(disc->size());
  for (auto& v : u) v = g(rng);
  const ProblemSpec same = pullback(spec, 1.0);
  for (Which w : {Which::F, Which::K})
    CHECK(energy(*disc, same, u, w) == doctest::Approx(energy(*disc, spec, u, w)).epsilon(1e-14));
}

TEST_CASE("pullback composes as a group") {
  for (const std::string name : {"pitchfork", "scaled_pendulum", "square_odd_cubic"}) {
    CAPTURE(name);
    const ProblemSpec spec = builtin(name).spec;
    const auto disc = disc_for(spec, spec.domain.dimension() == 1 ? 40 : 10);
    std::mt19937 rng(8);
    std::normal_distribution<double> g(0.0, 0.4);
    Vector u(disc->size());
    for (auto& v : u) v = g(rng);
    const double t1 = 0.8, t2 = 0.7;
    const ProblemSpec twice = pullback(pullback(spec, t1), t2);
    const ProblemSpec once = pullback(spec, t1 * t2);
    for (Which w : {Which::F, Which::K}) {
      const double a = energy(*disc, twice, u, w), b = energy(*disc, once, u, w);
      CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(b)));
    }
  }
}

TEST_CASE("pullback rejects scales outside (t_min, 1]") {
  const ProblemSpec spec = builtin("pitchfork").spec;
  CHECK_THROWS_AS(pullback(spec, 1.5), PreconditionError);
  CHECK_THROWS_AS(pullback(spec, default_t_min), PreconditionError);
  CHECK_THROWS_AS(pullback(spec, 0.0), PreconditionError);
  CHECK_NOTHROW(pullback(spec, 0.5));
}

TEST_CASE("linear pencil eigenvalues of the contracted domain decrease in t") {
  const ProblemSpec spec = builtin("linear_dirichlet").spec;
  const auto disc = disc_for(spec, 64);
  std::vector<double> prev;
  for (double t : t_grid(0.3, 1.0, 0.05)) {
    const PencilFamily f(disc, pullback(spec, t));
    const PencilEigenSystem eig = solve_pencil(f.operators(), {0.0, 200.0});
    std::vector<double> now;
    for (const auto& b : eig.blocks) now.push_back(b.lambda);
    REQUIRE(now.size() >= 3);
    // Domain (0, t pi): lambda_k = k^2 / t^2 up to discretization error.
    CHECK(now[0] == doctest::Approx(1.0 / (t * t)).epsilon(1e-3));
    if (!prev.empty())
      for (std::size_t k = 0; k < 3; ++k) CHECK(now[k] <= prev[k]);
    prev = now;
  }
}

TEST_CASE("conjugate times of scaled_quadratic") {
  const BuiltinProblem b = builtin("scaled_quadratic");
  const ScaledFamily fam(disc_for(b.spec, 128), b.spec);
  CHECK(fam.parameter_name() == "t");
  const ConjugatePointReport rep = conjugate_points(fam, t_grid(0.06, 1.0, 0.01));
  REQUIRE(rep.conjugate_times.size() == 2);
  CHECK(rep.conjugate_times[0].t == doctest::Approx(0.4).epsilon(5e-3));
  CHECK(rep.conjugate_times[1].t == doctest::Approx(0.8).epsilon(5e-3));
  CHECK(rep.conjugate_times[0].nu == 1);
  CHECK(rep.conjugate_times[1].nu == 1);
  CHECK(rep.mu_start == 2);
  CHECK(rep.mu_end == 0);
  CHECK(rep.smale_defect == 0);
  CHECK(rep.accepted());
}

TEST_CASE("conjugate point grid validation") {
  const BuiltinProblem b = builtin("scaled_quadratic");
  const ScaledFamily fam(disc_for(b.spec, 32), b.spec);
  CHECK_THROWS_AS(conjugate_points(fam, {0.5}), ConfigError);
  CHECK_THROWS_AS(conjugate_points(fam, {0.5, 0.4, 0.6}), ConfigError);
}

TEST_CASE("coarse grid without conjugate times has no defect") {
  const BuiltinProblem b = builtin("scaled_quadratic");
  const ScaledFamily fam(disc_for(b.spec, 64), b.spec);
  const ConjugatePointReport rep = conjugate_points(fam, t_grid(0.1, 0.35, 0.05));
  CHECK(rep.conjugate_times.empty());
  CHECK(rep.mu_start == rep.mu_end);
  CHECK(rep.smale_defect == 0);
}

TEST_CASE("pendulum branches at the first conjugate time") {
  const BuiltinProblem b = builtin("scaled_pendulum");
  const auto fam = std::make_shared<const ScaledFamily>(disc_for(b.spec, 128), b.spec);
  const double t_star = pi / std::sqrt(b.params.at("lambda0"));
  const ConjugatePointReport rep = conjugate_points(*fam, t_grid(0.5, 0.8, 0.01));
  REQUIRE(rep.conjugate_times.size() == 1);
  CHECK(rep.conjugate_times[0].t == doctest::Approx(t_star).epsilon(2e-3));
  const DeformationBranching db = deformation_bifurcation(fam, rep.conjugate_times[0].t);
  CHECK(db.nu == 1);
  CHECK(db.verdict.classification == Alternative::one_sided_pair);
  for (const auto& br : db.search.branches)
    for (const auto& s : br.samples) CHECK(s.lambda > db.t_star);
}

}
