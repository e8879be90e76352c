#pragma once

#include <optional>
#include <string>
#include <vector>

#include "varbif/family.hpp"
#include "varbif/reduction.hpp"
#include "varbif/spectrum.hpp"

namespace varbif {

enum class DefiniteSign { pos, neg, indefinite };
enum class Verdict { confirmed_sufficient, candidate_only, rejected };

std::string to_string(DefiniteSign s);
std::string to_string(Verdict v);

struct CandidateCriteria {
  bool necessity_passed = false;
  DefiniteSign G2_semidefinite_sign = DefiniteSign::indefinite;
  bool B1_positive = false;
  bool invariant_blocks_ok = false;
  bool r_jump = false;
};

struct CandidateReport {
  double lambda_star = 0.0;
  int nu = 0;
  CandidateCriteria criteria;
  Verdict verdict = Verdict::rejected;
  /// Morse indices at lambda* -+ delta/2.
  int mu_left = 0;
  int mu_right = 0;
  int r_plus = 0;
  int r_minus = 0;
  double delta = 0.0;
  std::vector<std::string> notes;
};

struct CandidateOptions {
  SpectralOptions spectral;
  /// Invariance defect accepted for the invariant-block route.
  double invariance_tol = 1e-6;
};

/// Every pencil eigenvalue in the window, annotated with the sufficiency routes.
/// Throws PreconditionError unless the base state is critical for F and K.
std::vector<CandidateReport> candidates(const PencilFamily& family, Interval window,
                                        const CandidateOptions& options = {});
/// Report for a single parameter value (rejected when the kernel is trivial).
CandidateReport assess_candidate(const PencilFamily& family, double lambda,
                                 const CandidateOptions& options = {});

struct NegativeControlOptions {
  int trials = 20;
  unsigned long long seed = 1;
  double ball_radius = 1.0;
  double lift_tol = 1e-8;
  double kernel_tol = 1e-8;
  int max_newton = 60;
};

struct NegativeControlResult {
  double lambda = 0.0;
  int trials = 0;
  int trivial = 0;
  int nontrivial = 0;
  int escaped = 0;
  int diverged = 0;
  bool passed = false;
};

/// Full-space damped Newton from random starts near the base state.
NegativeControlResult negative_control(const ParameterFamily& family, double lambda,
                                       const NegativeControlOptions& options = {});

struct BranchSample {
  double lambda = 0.0;
  Vector z;
  FieldVector u;
  double residual = 0.0;
  double amplitude = 0.0;
};

enum class Side { left, right, both };
std::string to_string(Side s);

struct Branch {
  int id = 0;
  std::vector<BranchSample> samples;
  Side side = Side::right;
  std::optional<int> symmetry_partner;
};

struct BranchSearchOptions {
  int workers = 1;
  /// Seed directions; 0 picks 2 / 16 / 64 by kernel dimension.
  int directions = 0;
  std::vector<double> radius_fractions{0.125, 0.25, 0.5};
  int max_iterations = 60;
};

struct BranchSearchResult {
  double lambda_star = 0.0;
  std::vector<double> grid;
  std::vector<Branch> branches;
  /// Nontrivial reduced zeros found at lambda* itself.
  std::vector<BranchSample> at_star;
  std::vector<std::string> log;
};

BranchSearchResult find_branches(const ReducedModel& model, const std::vector<double>& lambda_grid,
                                 const BranchSearchOptions& options = {});

enum class Alternative { two_sided_single, one_sided_pair, isolation_undetermined, none_found };
std::string to_string(Alternative a);

struct AlternativeVerdict {
  Alternative classification = Alternative::none_found;
  std::vector<int> branch_ids;
  std::vector<double> grid;
  std::vector<std::string> warnings;
};

AlternativeVerdict classify(const BranchSearchResult& result);

struct SymmetricCount {
  int n_plus = 0;
  int n_minus = 0;
  int dimension = 0;
  bool bound_satisfied = false;
  /// Every branch has its negative among the branches.
  bool closure = false;
  std::vector<std::string> warnings;
};

/// Counts branch pairs {u, -u} per side; requires an odd family.
SymmetricCount symmetric_count(const ReducedModel& model, const BranchSearchResult& result);

/// Whether amplitude is strictly monotone in |lambda - lambda*| along the branch.
bool monotone_amplitude(const Branch& branch, double lambda_star);

}  // namespace varbif
