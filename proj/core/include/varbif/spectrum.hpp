#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "varbif/assembly.hpp"
#include "varbif/types.hpp"

namespace varbif {

struct SpectralOptions {
  /// Kernel threshold relative to the largest |eigenvalue| of the form.
  double kernel_tol = 1e-8;
  /// Cluster merge threshold relative to the pencil's spectral radius.
  double cluster_tol = 1e-6;
  /// Regularizing shift s: the pencil is factored through B1 - s*B2.
  std::optional<double> shift;
  /// Largest system solved densely; above it spectrum slicing is used.
  int dense_limit = 4096;
};

/// One eigenvalue of B1 v = lambda B2 v with its gram-orthonormal eigenspace.
struct EigenBlock {
  double lambda = 0.0;
  Matrix basis;

  int multiplicity() const { return static_cast<int>(basis.cols()); }
};

struct PencilEigenSystem {
  Interval window;
  std::vector<EigenBlock> blocks;
  /// Ker(B2): the eigenspace at lambda = infinity, gram-orthonormal.
  Matrix kernel_of_B2;
  double spectral_radius = 0.0;
  double cluster_width = 0.0;
  /// True when every finite eigenvalue lies in the window.
  bool complete = false;

  /// Block whose eigenvalue is closest to lambda, or nullptr if empty.
  const EigenBlock* nearest(double lambda) const;
};

PencilEigenSystem solve_pencil(const DiscreteOperatorSet& ops, Interval window,
                               const SpectralOptions& options = {});

struct MorseData {
  double lambda = 0.0;
  int mu = 0;
  int nu = 0;
  std::vector<double> negative_eigenvalues;
};

/// Inertia of the form A relative to the gram geometry (A v = e M v).
MorseData morse_data(const SparseMatrix& form, const SparseMatrix& gram, double lambda,
                     const SpectralOptions& options = {});
/// Inertia of B1 - lambda B2.
MorseData morse_data(const DiscreteOperatorSet& ops, double lambda,
                     const SpectralOptions& options = {});

/// All eigenpairs of A v = e M v (dense; vectors gram-orthonormal).
struct FormSpectrum {
  Vector values;
  Matrix vectors;
};
FormSpectrum form_spectrum(const SparseMatrix& form, const SparseMatrix& gram, bool vectors = true);

enum class IndexMode { positive_B1, invariant_blocks };

struct IndexPrediction {
  int mu = 0;
  int nu = 0;
};

/// Morse index and nullity predicted from the pencil spectrum alone.
IndexPrediction index_formula(const PencilEigenSystem& eig, const DiscreteOperatorSet& ops,
                              double lambda, IndexMode mode, const SpectralOptions& options = {});

/// Relative invariance defect of span(basis) under M^{-1} B1.
double invariance_defect(const Matrix& basis, const DiscreteOperatorSet& ops);

using OperatorFamily = std::function<SparseMatrix(double)>;

struct ZeroGroupOptions {
  double kernel_tol = 1e-8;
  int ladder_levels = 8;
  int max_refinements = 6;
  int dense_limit = 4096;
};

/// One 0-group eigenvalue path on one side of lambda*; samples ordered by
/// increasing distance from lambda*, the first sample is lambda* itself.
struct EigenPath {
  std::vector<std::pair<double, double>> samples;
};

struct ZeroGroupReport {
  double lambda_star = 0.0;
  double probe_radius = 0.0;
  double gap = 0.0;
  int nu = 0;
  int r_plus = 0;
  int r_minus = 0;
  std::vector<EigenPath> right_paths;
  std::vector<EigenPath> left_paths;

  bool jump() const { return r_plus != r_minus; }
};

/// Tracks the eigenvalues of B_lambda (gram geometry) that vanish at lambda*
/// over the ladder lambda* +- probe_radius * 2^-j and counts the negative ones
/// on each side.
ZeroGroupReport zero_group(const OperatorFamily& family, const SparseMatrix& gram,
                           double lambda_star, double probe_radius,
                           const ZeroGroupOptions& options = {});

/// Structured text record with the path samples.
std::string to_record(const ZeroGroupReport& report);

}  // namespace varbif
