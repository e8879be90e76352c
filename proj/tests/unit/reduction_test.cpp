#include <doctest.h>

#include <cmath>
#include <memory>

#include "varbif/bifurcation.hpp"
#include "varbif/errors.hpp"
#include "varbif/problems.hpp"
#include "varbif/reduction.hpp"
#include "varbif/spectrum.hpp"

using namespace varbif;

namespace {

struct Fixture {
  std::shared_ptr<const PencilFamily> family;
  double lambda_star = 0.0;
};

Fixture pitchfork(int resolution = 128) {
  const BuiltinProblem b = builtin("pitchfork");
  auto disc = std::make_shared<const Discretization>(build_grid(b.spec.domain, resolution), 1);
  Fixture f;
  f.family = std::make_shared<const PencilFamily>(disc, b.spec);
  f.lambda_star = solve_pencil(f.family->operators(), {0.5, 1.5}).blocks.front().lambda;
  return f;
}

}  // namespace

TEST_SUITE("reduction") {

TEST_CASE("kernel frame is gram-orthonormal with a fixed sign") {
  const Fixture f = pitchfork();
  const KernelFrame frame = kernel_frame(*f.family, f.lambda_star);
  REQUIRE(frame.dimension() == 1);
  const Matrix G = frame.Z.transpose() * frame.gram * frame.Z;
  CHECK(std::abs(G(0, 0) - 1.0) <= 1e-10);
  Eigen::Index at = 0;
  frame.Z.col(0).cwiseAbs().maxCoeff(&at);
  CHECK(frame.Z(at, 0) > 0.0);
  const Vector v = frame.Z.col(0) * 2.0 + Vector::Ones(frame.Z.rows()) * 1e-3;
  CHECK((frame.project(v) + frame.complement(v) - v).norm() <= 1e-12 * v.norm());
  CHECK(std::abs(frame.coordinates(frame.complement(v))[0]) <= 1e-12);
}

TEST_CASE("kernel frame rejects a non-eigenvalue") {
  const Fixture f = pitchfork();
  CHECK_THROWS_AS(kernel_frame(*f.family, 2.5), PreconditionError);
}

TEST_CASE("corrector solves the complement equation") {
  const Fixture f = pitchfork();
  ReducedModel model(f.family, kernel_frame(*f.family, f.lambda_star));
  const CorrectorSolution sol = model.solve_corrector(f.lambda_star + 0.2, Vector::Constant(1, 0.3));
  CHECK(sol.residual <= 1e-11);
  CHECK(std::abs(model.frame().coordinates(sol.psi)[0]) <= 1e-12);
  CHECK(model.cache_size() >= 1);
}

TEST_CASE("trivial point is a reduced critical point with zero value") {
  const Fixture f = pitchfork();
  ReducedModel model(f.family, kernel_frame(*f.family, f.lambda_star));
  const Vector z = Vector::Zero(1);
  CHECK(model.reduced_gradient(f.lambda_star + 0.1, z).norm() <= 1e-12);
  CHECK(std::abs(model.reduced_value(f.lambda_star + 0.1, z) - model.family().energy(f.lambda_star + 0.1, model.base())) <= 1e-12);
}

TEST_CASE("reduced functional is even for an odd family") {
  const Fixture f = pitchfork();
  ReducedModel model(f.family, kernel_frame(*f.family, f.lambda_star));
  for (double z : {0.1, 0.35, 0.6}) {
    const double lam = f.lambda_star + 0.15;
    CHECK(model.reduced_value(lam, Vector::Constant(1, z)) ==
          doctest::Approx(model.reduced_value(lam, Vector::Constant(1, -z))).epsilon(1e-12));
  }
}

TEST_CASE("reduced Hessian at the origin: routes agree and vanish at lambda*") {
  const Fixture f = pitchfork();
  ReducedModel model(f.family, kernel_frame(*f.family, f.lambda_star));
  CHECK(model.reduced_hessian_origin(f.lambda_star).norm() <= 1e-9);
  for (double off : {-0.3, 0.3}) {
    const Matrix a = model.reduced_hessian_origin(f.lambda_star + off, HessianRoute::exact);
    CHECK((a - model.reduced_hessian_origin(f.lambda_star + off, HessianRoute::pencil_form)).norm() <= 1e-9);
    CHECK((a - model.reduced_hessian_origin(f.lambda_star + off, HessianRoute::frozen_complement)).norm() <= 1e-9);
    // Linear in lambda - lambda* with slope -1 for K = u^2/2 in the gram frame.
    CHECK(a(0, 0) == doctest::Approx(-off * (model.frame().Z.col(0).dot(f.family->operators().B2 * model.frame().Z.col(0)))).epsilon(1e-6));
  }
  const Matrix h = model.reduced_hessian(f.lambda_star + 0.3, Vector::Zero(1));
  CHECK((h - model.reduced_hessian_origin(f.lambda_star + 0.3)).norm() <= 1e-6);
}

TEST_CASE("reduced zeros lift to full solutions") {
  const Fixture f = pitchfork();
  ReducedModel model(f.family, kernel_frame(*f.family, f.lambda_star));
  const BranchSearchResult res = find_branches(model, {f.lambda_star + 0.1});
  REQUIRE(res.branches.size() == 2);
  for (const auto& b : res.branches) {
    const BranchSample& s = b.samples.front();
    CHECK(model.lift_residual(s.lambda, s.z) <= 1e-8);
    CHECK(f.family->residual(s.lambda, s.u) <= 1e-8);
  }
}

TEST_CASE("ball and parameter box are enforced") {
  const Fixture f = pitchfork();
  ReductionOptions opts;
  opts.ball_radius = 0.5;
  ReducedModel model(f.family, kernel_frame(*f.family, f.lambda_star), opts);
  CHECK_THROWS_AS(model.solve_corrector(f.lambda_star, Vector::Constant(1, 0.9)), PreconditionError);
  CHECK_THROWS_AS(model.solve_corrector(f.lambda_star + 10.0, Vector::Constant(1, 0.1)), PreconditionError);
  CHECK_THROWS_AS(model.solve_corrector(f.lambda_star, Vector::Zero(2)), ConfigError);
}

TEST_CASE("eigenvalue separation is the distance to the next eigenvalue") {
  const Fixture f = pitchfork(256);
  CHECK(eigenvalue_separation(*f.family, f.lambda_star) == doctest::Approx(3.0).epsilon(1e-3));
}

}
