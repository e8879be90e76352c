#pragma once

#include <memory>
#include <vector>

#include "varbif/bifurcation.hpp"
#include "varbif/family.hpp"
#include "varbif/reduction.hpp"

namespace varbif {

constexpr double default_t_min = 0.05;

/// Pulls the integrands back from the scaled domain tΩ to Ω:
/// F_t(x, xi) = t^n F(tx, xi0, xi1 / t), K_t(x, xi0) = t^n K(tx, xi0).
/// Throws PreconditionError unless t_min < t <= 1.
ProblemSpec pullback(const ProblemSpec& problem, double t, double t_min = default_t_min);

/// t -> F_t on a fixed grid of Ω.
class ScaledFamily : public ParameterFamily {
 public:
  ScaledFamily(std::shared_ptr<const Discretization> disc, ProblemSpec base, double t_min = default_t_min);

  const Discretization& discretization() const override { return *disc_; }
  const ProblemSpec& base_problem() const { return base_; }
  double t_min() const { return t_min_; }
  FieldVector base_state() const override;
  bool odd() const override { return base_.symmetry == Symmetry::odd; }
  std::string parameter_name() const override { return "t"; }

  double energy(double t, const FieldVector& u) const override;
  Vector load(double t, const FieldVector& u) const override;
  SparseMatrix hessian(double t, const FieldVector& u) const override;

 private:
  std::shared_ptr<const Discretization> disc_;
  ProblemSpec base_;
  double t_min_;
};

struct ConjugateOptions {
  double kernel_tol = 1e-8;
  /// Bisection depth when locating a jump of the Morse index between grid points.
  int bisection_steps = 50;
  /// Smallest eigenvalues recorded per grid point (dense problems only).
  int record_eigenvalues = 0;
};

struct ConjugateTime {
  double t = 0.0;
  int nu = 0;
  /// mu(t+) - mu(t-) across the refined bracket.
  int jump = 0;
};

struct ConjugatePointReport {
  std::vector<ConjugateTime> conjugate_times;
  std::vector<double> t_grid;
  std::vector<int> mu;
  std::vector<Vector> smallest_eigenvalues;
  int mu_start = 0;
  int mu_end = 0;
  int smale_defect = 0;

  bool accepted() const { return smale_defect == 0; }
};

/// Morse index of the family Hessian at the base state over the grid, with
/// bisection-refined index jumps; mu_start is taken at the largest t.
ConjugatePointReport conjugate_points(const ParameterFamily& family, std::vector<double> t_grid,
                                      const ConjugateOptions& options = {});

struct DeformationBranching {
  double t_star = 0.0;
  int nu = 0;
  BranchSearchResult search;
  AlternativeVerdict verdict;
};

/// Reduction and branch search in the deformation parameter around t_star on
/// the grid t_star (1 +- offsets).
DeformationBranching deformation_bifurcation(std::shared_ptr<const ScaledFamily> family, double t_star,
                                             const ReductionOptions& reduction = {},
                                             const BranchSearchOptions& search = {},
                                             const std::vector<double>& offsets = {0.0025, 0.005, 0.01});

}  // namespace varbif
