#pragma once

#include "varbif/types.hpp"

namespace varbif {

struct Inertia {
  int negative = 0;
  int zero = 0;
  int positive = 0;
};

/// Sylvester inertia of a sparse symmetric matrix from an LDL^T factorization.
Inertia sparse_inertia(const SparseMatrix& A);

/// Number of eigenvalues of the definite pencil A v = e B v below s (B SPD).
int count_below(const SparseMatrix& A, const SparseMatrix& B, double s);

/// Eigenpairs of a symmetric-definite pencil; vectors are B-orthonormal columns.
struct EigenPairs {
  Vector values;
  Matrix vectors;
};

/// Dense solve of A v = e B v for B symmetric positive definite.
EigenPairs dense_definite_eigen(const Matrix& A, const Matrix& B, bool vectors = true);

/// Eigenpairs of A v = e B v in [lo, hi] by spectrum slicing: inertia counts
/// isolate clusters of width below cluster_width, subspace inverse iteration
/// with Rayleigh-Ritz refines each cluster.
EigenPairs slice_eigen(const SparseMatrix& A, const SparseMatrix& B, Interval range,
                       double cluster_width, bool vectors = true);

/// Upper bound on max |e| for A v = e B v with B diagonal-dominant, via power iteration.
double estimate_spectral_radius(const SparseMatrix& A, const SparseMatrix& B, int iterations = 60);

}  // namespace varbif
