#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "varbif/errors.hpp"
#include "varbif/family.hpp"
#include "varbif/problems.hpp"
#include "varbif/spectrum.hpp"

using namespace varbif;

namespace {

constexpr double pi = std::numbers::pi;

DiscreteOperatorSet operators(const std::string& name, int resolution,
                              const std::optional<Domain>& domain = std::nullopt) {
  const BuiltinProblem b = builtin(name, {}, domain);
  auto disc = std::make_shared<const Discretization>(build_grid(b.spec.domain, resolution), 1);
  return PencilFamily(disc, b.spec).operators();
}

// Exact eigenvalues of the 3-point stencil pencil with lumped mass on (0, pi).
double discrete_eigenvalue(int k, int n) {
  const double h = pi / n;
  const double s = std::sin(k * h / 2);
  return 4.0 * s * s / (h * h);
}

}  // namespace

TEST_SUITE("spectrum") {

TEST_CASE("interval pencil matches the discrete sine spectrum") {
  const int n = 64;
  const DiscreteOperatorSet ops = operators("linear_dirichlet", n);
  const PencilEigenSystem eig = solve_pencil(ops, {0.0, 40.0});
  REQUIRE(eig.blocks.size() == 6);
  for (int k = 1; k <= 6; ++k) {
    CHECK(eig.blocks[k - 1].lambda == doctest::Approx(discrete_eigenvalue(k, n)).epsilon(1e-10));
    CHECK(eig.blocks[k - 1].multiplicity() == 1);
  }
}

TEST_CASE("pencil residuals and gram orthonormality") {
  const DiscreteOperatorSet ops = operators("linear_dirichlet", 12, Domain::rectangle(0.0, pi, 0.0, pi));
  const PencilEigenSystem eig = solve_pencil(ops, {0.0, 30.0});
  Matrix all(ops.gram.rows(), 0);
  for (const auto& b : eig.blocks) {
    const Matrix R = ops.B1 * b.basis - b.lambda * (ops.B2 * b.basis);
    // Dual (gram-inverse) norm of each residual column.
    Eigen::SimplicialLLT<SparseMatrix> llt(ops.gram);
    for (int c = 0; c < R.cols(); ++c) CHECK(std::sqrt(R.col(c).dot(llt.solve(R.col(c)))) <= 1e-9);
    Matrix next(all.rows(), all.cols() + b.basis.cols());
    next << all, b.basis;
    all = next;
  }
  const Matrix G = all.transpose() * ops.gram * all;
  CHECK((G - Matrix::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("square multiplicities") {
  const DiscreteOperatorSet ops = operators("linear_dirichlet", 16, Domain::rectangle(0.0, pi, 0.0, pi));
  const PencilEigenSystem eig = solve_pencil(ops, {0.0, 9.0});
  REQUIRE(eig.blocks.size() == 3);
  CHECK(eig.blocks[0].multiplicity() == 1);
  CHECK(eig.blocks[1].multiplicity() == 2);
  CHECK(eig.blocks[2].multiplicity() == 1);
}

TEST_CASE("spectrum slicing agrees with the dense solver") {
  const DiscreteOperatorSet ops = operators("linear_dirichlet", 24, Domain::rectangle(0.0, pi, 0.0, pi));
  SpectralOptions sliced;
  sliced.dense_limit = 100;
  const PencilEigenSystem a = solve_pencil(ops, {0.0, 11.0});
  const PencilEigenSystem b = solve_pencil(ops, {0.0, 11.0}, sliced);
  REQUIRE(a.blocks.size() == b.blocks.size());
  for (std::size_t k = 0; k < a.blocks.size(); ++k) {
    CHECK(a.blocks[k].lambda == doctest::Approx(b.blocks[k].lambda).epsilon(1e-9));
    CHECK(a.blocks[k].multiplicity() == b.blocks[k].multiplicity());
  }
}

TEST_CASE("spectrum is invariant under a random gram congruence") {
  DiscreteOperatorSet ops = operators("pitchfork", 20);
  const int n = static_cast<int>(ops.gram.rows());
  std::mt19937 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix P = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) P(i, j) += 0.1 * g(rng);
  auto congruent = [&](const SparseMatrix& A) { return SparseMatrix((P.transpose() * Matrix(A) * P).sparseView()); };
  DiscreteOperatorSet moved = ops;
  moved.gram = congruent(ops.gram);
  moved.B1 = congruent(ops.B1);
  moved.B2 = congruent(ops.B2);
  moved.P_part = congruent(ops.P_part);
  moved.Q_part = congruent(ops.Q_part);
  const PencilEigenSystem a = solve_pencil(ops, {0.0, 50.0});
  const PencilEigenSystem b = solve_pencil(moved, {0.0, 50.0});
  REQUIRE(a.blocks.size() == b.blocks.size());
  for (std::size_t k = 0; k < a.blocks.size(); ++k)
    CHECK(std::abs(a.blocks[k].lambda - b.blocks[k].lambda) <= 1e-9 * std::max(1.0, a.blocks[k].lambda));
}

TEST_CASE("morse data at and between eigenvalues") {
  const DiscreteOperatorSet ops = operators("linear_dirichlet", 256);
  const PencilEigenSystem eig = solve_pencil(ops, {0.0, 10.0});
  const double l2 = eig.nearest(4.0)->lambda;
  const MorseData at = morse_data(ops, l2);
  CHECK(at.mu == 1);
  CHECK(at.nu == 1);
  const MorseData between = morse_data(ops, 2.5);
  CHECK(between.mu == 1);
  CHECK(between.nu == 0);
  CHECK(between.negative_eigenvalues.size() == 1);
}

TEST_CASE("index jump equals the nullity at every simple eigenvalue") {
  const DiscreteOperatorSet ops = operators("linear_dirichlet", 10, Domain::rectangle(0.0, pi, 0.0, pi));
  const PencilEigenSystem eig = solve_pencil(ops, {0.0, 20.0});
  for (std::size_t k = 0; k < eig.blocks.size(); ++k) {
    const double lam = eig.blocks[k].lambda;
    double gap = 1e9;
    for (std::size_t j = 0; j < eig.blocks.size(); ++j)
      if (j != k) gap = std::min(gap, std::abs(eig.blocks[j].lambda - lam));
    const double d = 0.25 * gap;
    CHECK(morse_data(ops, lam + d).mu - morse_data(ops, lam - d).mu == morse_data(ops, lam).nu);
    CHECK(morse_data(ops, lam).nu == eig.blocks[k].multiplicity());
  }
}

TEST_CASE("index formula modes agree with inertia on a 2D sweep") {
  const DiscreteOperatorSet ops = operators("linear_dirichlet", 8, Domain::rectangle(0.0, pi, 0.0, pi));
  const PencilEigenSystem eig = solve_pencil(ops, {-1.0, 1e4});
  REQUIRE(eig.complete);
  for (double lam = -3.0; lam < 60.0; lam += 0.77) {
    const MorseData md = morse_data(ops, lam);
    const IndexPrediction a = index_formula(eig, ops, lam, IndexMode::positive_B1);
    const IndexPrediction b = index_formula(eig, ops, lam, IndexMode::invariant_blocks);
    CHECK(md.mu == a.mu);
    CHECK(md.nu == a.nu);
    CHECK(md.mu == b.mu);
  }
}

TEST_CASE("pencil eigenspaces of a quadratic problem are invariant") {
  const DiscreteOperatorSet ops = operators("linear_dirichlet", 32);
  const PencilEigenSystem eig = solve_pencil(ops, {0.0, 10.0});
  for (const auto& b : eig.blocks) CHECK(invariance_defect(b.basis, ops) <= 1e-8);
}

TEST_CASE("zero group: downward crossing gives r+ = 1, r- = 0") {
  const DiscreteOperatorSet ops = operators("linear_dirichlet", 128);
  const double l1 = solve_pencil(ops, {0.5, 1.5}).blocks.front().lambda;
  const ZeroGroupReport zg =
      zero_group([&](double l) { return SparseMatrix(ops.B1 - l * ops.B2); }, ops.gram, l1, 0.5);
  CHECK(zg.nu == 1);
  CHECK(zg.r_plus == 1);
  CHECK(zg.r_minus == 0);
  CHECK(zg.jump());
  const std::string rec = to_record(zg);
  CHECK(rec.find("r_plus") != std::string::npos);
}

TEST_CASE("zero group: an even path has no jump") {
  SparseMatrix I(3, 3);
  I.setIdentity();
  SparseMatrix A(3, 3);
  A.insert(1, 1) = 1.0;
  A.insert(2, 2) = 2.0;
  const ZeroGroupReport zg = zero_group([&](double l) { return SparseMatrix(A - l * l * I); }, I, 0.0, 0.2);
  CHECK(zg.nu == 1);
  CHECK(zg.r_plus == zg.r_minus);
  CHECK_FALSE(zg.jump());
}

}
