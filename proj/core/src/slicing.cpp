#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "varbif/errors.hpp"
#include "varbif/slicing.hpp"

namespace varbif {

namespace {

using Ldlt = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

bool try_inertia(const SparseMatrix& A, Inertia& out) {
  Ldlt ldlt(A);
  if (ldlt.info() != Eigen::Success) return false;
  const Vector& d = ldlt.vectorD();
  if (!d.allFinite()) return false;
  out = {};
  for (int i = 0; i < d.size(); ++i) {
    if (d[i] < 0.0)
      ++out.negative;
    else if (d[i] > 0.0)
      ++out.positive;
    else
      ++out.zero;
  }
  return true;
}

// Orthonormalizes the columns of Y against B; returns false on rank loss.
bool b_orthonormalize(Matrix& Y, const SparseMatrix& B) {
  Matrix G = Y.transpose() * (B * Y);
  G = 0.5 * (G + G.transpose()).eval();
  Eigen::LLT<Matrix> llt(G);
  if (llt.info() != Eigen::Success) return false;
  Y = llt.matrixL().solve(Y.transpose()).transpose();
  return true;
}

}  // namespace

Inertia sparse_inertia(const SparseMatrix& A) {
  Inertia in;
  if (!try_inertia(A, in)) throw ConvergenceError("LDL^T factorization broke down (zero pivot)");
  return in;
}

int count_below(const SparseMatrix& A, const SparseMatrix& B, double s) {
  double shift = s;
  for (int attempt = 0; attempt < 6; ++attempt) {
    const SparseMatrix S = A - shift * B;
    Inertia in;
    if (try_inertia(S, in) && in.zero == 0) return in.negative;
    shift += 1e-13 * (std::abs(s) + 1.0) * (attempt + 1);
  }
  throw ConvergenceError("inertia count failed near shift " + std::to_string(s));
}

EigenPairs dense_definite_eigen(const Matrix& A, const Matrix& B, bool vectors) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(
      A, B, (vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly) | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success)
    throw PreconditionError("generalized eigensolver failed: B is not positive definite");
  EigenPairs out;
  out.values = solver.eigenvalues();
  if (vectors) out.vectors = solver.eigenvectors();
  return out;
}

EigenPairs slice_eigen(const SparseMatrix& A, const SparseMatrix& B, Interval range,
                       double cluster_width, bool vectors) {
  struct Piece {
    double a, b;
    int ca, cb;
  };
  std::vector<Piece> clusters;
  std::vector<Piece> stack{{range.lo, range.hi, count_below(A, B, range.lo),
                            count_below(A, B, range.hi)}};
  while (!stack.empty()) {
    Piece p = stack.back();
    stack.pop_back();
    if (p.cb == p.ca) continue;
    if (p.b - p.a <= cluster_width) {
      clusters.push_back(p);
      continue;
    }
    const double mid = 0.5 * (p.a + p.b);
    const int cm = count_below(A, B, mid);
    stack.push_back({p.a, mid, p.ca, cm});
    stack.push_back({mid, p.b, cm, p.cb});
  }
  std::sort(clusters.begin(), clusters.end(), [](const Piece& x, const Piece& y) { return x.a < y.a; });

  const int n = static_cast<int>(A.rows());
  std::vector<double> values;
  std::vector<Vector> vecs;
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> normal;
  for (const Piece& c : clusters) {
    const int m = c.cb - c.ca;
    double sigma = 0.5 * (c.a + c.b);
    Matrix X(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) X(i, j) = normal(rng);
    Vector theta = Vector::Constant(m, sigma);
    for (int outer = 0; outer < 3; ++outer) {
      Ldlt solver;
      double s = sigma;
      for (int attempt = 0; attempt < 6; ++attempt) {
        solver.compute(SparseMatrix(A - s * B));
        if (solver.info() == Eigen::Success && solver.vectorD().allFinite() &&
            solver.vectorD().cwiseAbs().minCoeff() > 0.0)
          break;
        s += 1e-12 * (std::abs(sigma) + 1.0) * (attempt + 1);
      }
      if (solver.info() != Eigen::Success)
        throw ConvergenceError("shifted factorization failed in spectrum slicing");
      for (int it = 0; it < 6; ++it) {
        Matrix Y = solver.solve(Matrix(B * X));
        if (!b_orthonormalize(Y, B)) throw ConvergenceError("subspace collapsed in inverse iteration");
        Matrix Am = Y.transpose() * (A * Y);
        Am = 0.5 * (Am + Am.transpose()).eval();
        Matrix Bm = Y.transpose() * (B * Y);
        Bm = 0.5 * (Bm + Bm.transpose()).eval();
        Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> rr(Am, Bm);
        theta = rr.eigenvalues();
        X = Y * rr.eigenvectors();
      }
      sigma = theta.mean();
    }
    for (int j = 0; j < m; ++j) {
      values.push_back(theta[j]);
      if (vectors) vecs.push_back(X.col(j));
    }
  }
  EigenPairs out;
  out.values = Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  if (vectors) {
    out.vectors.resize(n, static_cast<Eigen::Index>(vecs.size()));
    for (std::size_t j = 0; j < vecs.size(); ++j) out.vectors.col(static_cast<Eigen::Index>(j)) = vecs[j];
  }
  return out;
}

double estimate_spectral_radius(const SparseMatrix& A, const SparseMatrix& B, int iterations) {
  Eigen::SimplicialLLT<SparseMatrix> llt(B);
  if (llt.info() != Eigen::Success) throw PreconditionError("spectral radius estimate needs SPD B");
  const int n = static_cast<int>(A.rows());
  Vector x = Vector::LinSpaced(n, 1.0, 2.0);
  double rho = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector y = llt.solve(A * x);
    const double nrm = std::sqrt(std::abs(y.dot(B * y)));
    if (nrm == 0.0) return 0.0;
    x = y / nrm;
    rho = std::abs(x.dot(A * x) / x.dot(B * x));
  }
  return 1.05 * rho;
}

}  // namespace varbif
