#include <doctest.h>

#include <algorithm>
#include <memory>
#include <random>

#include "varbif/errors.hpp"
#include "varbif/family.hpp"
#include "varbif/problems.hpp"

using namespace varbif;

TEST_SUITE("problems") {

TEST_CASE("registry names") {
  const auto names = builtin_names();
  for (const char* n : {"linear_dirichlet", "pitchfork", "transcritical", "mean_curvature", "square_odd_cubic",
                        "scaled_quadratic", "scaled_pendulum"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  CHECK(std::is_sorted(names.begin(), names.end()));
}

TEST_CASE("unknown names and parameters are configuration errors") {
  CHECK_THROWS_AS(builtin("nosuch"), ConfigError);
  CHECK_THROWS_AS(builtin("pitchfork", {{"d", 1.0}}), ConfigError);
  CHECK_NOTHROW(builtin("pitchfork", {{"c", 2.0}}));
}

TEST_CASE("every reference datum names its oracle") {
  for (const auto& name : builtin_names()) {
    const BuiltinProblem b = builtin(name);
    CHECK_FALSE(b.summary.empty());
    for (const auto& r : b.references) {
      CHECK_FALSE(r.quantity.empty());
      CHECK_FALSE(r.provenance.empty());
    }
    for (const auto& p : builtin_parameters(name)) CHECK(b.params.count(p.name) == 1);
  }
}

TEST_CASE("declared symmetries") {
  CHECK(builtin("pitchfork").spec.symmetry == Symmetry::odd);
  CHECK(builtin("square_odd_cubic").spec.symmetry == Symmetry::odd);
  CHECK(builtin("transcritical").spec.symmetry == Symmetry::none);
  CHECK(builtin("square_odd_cubic").spec.domain.dimension() == 2);
}

TEST_CASE("mean curvature linearization at zero is the gram matrix") {
  const BuiltinProblem b = builtin("mean_curvature");
  auto disc = std::make_shared<const Discretization>(build_grid(b.spec.domain, 32), 1);
  const PencilFamily f(disc, b.spec);
  const DiscreteOperatorSet ops = f.operators();
  CHECK((Matrix(ops.B1) - Matrix(disc->gram())).norm() <= 1e-12 * Matrix(disc->gram()).norm());
}

TEST_CASE("polynomial problem reproduces the pitchfork energies") {
  const BuiltinProblem b = builtin("pitchfork", {{"c", 1.5}});
  const ProblemSpec p = polynomial_problem(b.spec.domain, 1.0, {0.0, 0.0, 0.0, 0.0, 1.5 / 4}, {0.0, 0.0, 0.5},
                                           Symmetry::odd);
  const Discretization disc(build_grid(b.spec.domain, 40), 1);
  std::mt19937 rng(4);
  std::normal_distribution<double> g(0.0, 0.5);
  Vector u(disc.size());
  for (auto& v : u) v = g(rng);
  for (Which w : {Which::F, Which::K})
    CHECK(energy(disc, p, u, w) == doctest::Approx(energy(disc, b.spec, u, w)).epsilon(1e-13));
}

TEST_CASE("the base state is critical for every builtin") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const BuiltinProblem b = builtin(name);
    auto disc =
        std::make_shared<const Discretization>(build_grid(b.spec.domain, b.spec.domain.dimension() == 1 ? 32 : 8), 1);
    const PencilFamily f(disc, b.spec);
    CHECK(f.residual(1.7, f.base_state()) <= 1e-12);
  }
}

}
