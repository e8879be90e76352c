#include <doctest.h>

#include <memory>

#include "varbif/bifurcation.hpp"
#include "varbif/errors.hpp"
#include "varbif/problems.hpp"
#include "varbif/reduction.hpp"
#include "varbif/spectrum.hpp"

using namespace varbif;

namespace {

std::shared_ptr<const PencilFamily> family(const std::string& name, int resolution) {
  const BuiltinProblem b = builtin(name);
  auto disc = std::make_shared<const Discretization>(build_grid(b.spec.domain, resolution), 1);
  return std::make_shared<const PencilFamily>(disc, b.spec);
}

double first(const PencilFamily& f) { return solve_pencil(f.operators(), {0.5, 1.5}).blocks.front().lambda; }

}  // namespace

TEST_SUITE("bifurcation") {

TEST_CASE("pitchfork candidates in (0,10) are confirmed") {
  const auto f = family("pitchfork", 128);
  const auto reports = candidates(*f, {0.0, 10.0});
  REQUIRE(reports.size() == 3);
  const double expect[] = {1.0, 4.0, 9.0};
  for (int k = 0; k < 3; ++k) {
    CHECK(reports[k].lambda_star == doctest::Approx(expect[k]).epsilon(2e-3));
    CHECK(reports[k].nu == 1);
    CHECK(reports[k].verdict == Verdict::confirmed_sufficient);
    CHECK(reports[k].criteria.G2_semidefinite_sign == DefiniteSign::pos);
    CHECK(reports[k].mu_right - reports[k].mu_left == 1);
  }
}

TEST_CASE("assess_candidate rejects a non-eigenvalue") {
  const auto f = family("pitchfork", 64);
  CHECK(assess_candidate(*f, 2.5).verdict == Verdict::rejected);
}

TEST_CASE("pitchfork branch pair is one-sided and symmetric") {
  const auto f = family("pitchfork", 128);
  ReducedModel model(f, kernel_frame(*f, first(*f)));
  const double ls = model.lambda_star();
  const BranchSearchResult res = find_branches(model, {ls - 0.1, ls - 0.05, ls + 0.05, ls + 0.1, ls + 0.2});
  REQUIRE(res.branches.size() == 2);
  CHECK(classify(res).classification == Alternative::one_sided_pair);
  for (const auto& b : res.branches) {
    CHECK(b.side == Side::right);
    REQUIRE(b.symmetry_partner.has_value());
    CHECK(monotone_amplitude(b, ls));
  }
  const SymmetricCount sc = symmetric_count(model, res);
  CHECK(sc.n_plus == 1);
  CHECK(sc.n_minus == 0);
  CHECK(sc.bound_satisfied);
  CHECK(sc.closure);
}

TEST_CASE("branch search does not depend on the worker count") {
  const auto f = family("pitchfork", 96);
  ReducedModel model(f, kernel_frame(*f, first(*f)));
  const double ls = model.lambda_star();
  const std::vector<double> grid{ls - 0.05, ls + 0.05, ls + 0.1, ls + 0.15};
  BranchSearchOptions serial, parallel;
  parallel.workers = 4;
  const auto a = find_branches(model, grid, serial);
  const auto b = find_branches(model, grid, parallel);
  REQUIRE(a.branches.size() == b.branches.size());
  for (std::size_t i = 0; i < a.branches.size(); ++i) {
    REQUIRE(a.branches[i].samples.size() == b.branches[i].samples.size());
    for (std::size_t k = 0; k < a.branches[i].samples.size(); ++k)
      CHECK(a.branches[i].samples[k].amplitude == b.branches[i].samples[k].amplitude);
  }
}

TEST_CASE("transcritical branch crosses lambda*") {
  const auto f = family("transcritical", 128);
  ReducedModel model(f, kernel_frame(*f, first(*f)));
  const double ls = model.lambda_star();
  const BranchSearchResult res = find_branches(model, {ls - 0.1, ls - 0.05, ls + 0.05, ls + 0.1});
  const AlternativeVerdict v = classify(res);
  CHECK(v.classification == Alternative::two_sided_single);
  CHECK(res.branches.size() == 1);
}

TEST_CASE("classification of synthetic search results") {
  BranchSearchResult r;
  r.lambda_star = 1.0;
  r.grid = {0.9, 1.1};
  CHECK(classify(r).classification == Alternative::none_found);
  CHECK_FALSE(classify(r).warnings.empty());

  Branch b;
  b.side = Side::right;
  r.branches = {b};
  CHECK(classify(r).classification == Alternative::none_found);
  r.branches.push_back(b);
  CHECK(classify(r).classification == Alternative::one_sided_pair);
  r.branches[1].side = Side::left;
  CHECK(classify(r).classification == Alternative::two_sided_single);

  r.at_star.push_back(BranchSample{});
  CHECK(classify(r).classification == Alternative::isolation_undetermined);

  BranchSearchResult one_sided_grid;
  one_sided_grid.lambda_star = 1.0;
  one_sided_grid.grid = {1.1, 1.2};
  CHECK_FALSE(classify(one_sided_grid).warnings.empty());
}

TEST_CASE("negative control: no nontrivial solutions away from eigenvalues") {
  const auto f = family("pitchfork", 128);
  for (double lam : {0.5, 2.5}) {
    const NegativeControlResult nc = negative_control(*f, lam);
    CHECK(nc.passed);
    CHECK(nc.trials == 20);
    CHECK(nc.nontrivial == 0);
  }
}

TEST_CASE("negative control detects the branch right of lambda*") {
  const auto f = family("pitchfork", 128);
  const NegativeControlResult nc = negative_control(*f, 1.2);
  CHECK_FALSE(nc.passed);
  CHECK(nc.nontrivial > 0);
}

TEST_CASE("negative control needs a trivial kernel") {
  const auto f = family("pitchfork", 64);
  CHECK_THROWS_AS(negative_control(*f, first(*f)), PreconditionError);
}

TEST_CASE("symmetric count needs an odd family") {
  const auto f = family("transcritical", 64);
  ReducedModel model(f, kernel_frame(*f, first(*f)));
  CHECK_THROWS_AS(symmetric_count(model, BranchSearchResult{}), PreconditionError);
}

TEST_CASE("enum names") {
  CHECK(to_string(Verdict::confirmed_sufficient) == "confirmed_sufficient");
  CHECK(to_string(Alternative::one_sided_pair) == "one_sided_pair");
  CHECK(to_string(Side::both) == "both");
  CHECK(to_string(DefiniteSign::indefinite) == "indefinite");
}

}
