#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "varbif/family.hpp"
#include "varbif/types.hpp"

namespace varbif {

/// Gram-orthonormal basis of the kernel H0 of the family Hessian at lambda*.
struct KernelFrame {
  double lambda_star = 0.0;
  Matrix Z;
  SparseMatrix gram;

  int dimension() const { return static_cast<int>(Z.cols()); }
  /// Coordinates Z^T M v.
  Vector coordinates(const FieldVector& v) const;
  /// P0 v = Z Z^T M v
  FieldVector project(const FieldVector& v) const;
  FieldVector complement(const FieldVector& v) const;
};

/// Throws PreconditionError ("not a candidate point") when the numerical kernel is empty.
KernelFrame kernel_frame(const ParameterFamily& family, double lambda_star, double kernel_tol = 1e-8,
                         int dense_limit = 4096);

struct ReductionOptions {
  double ball_radius = 1.0;
  /// Defaults to 0.4 x distance from lambda* to the nearest other eigenvalue
  /// of the linearized family.
  std::optional<double> lambda_halfwidth;
  double corrector_tol = 1e-11;
  double reduced_tol = 1e-9;
  double lift_tol = 1e-8;
  double kernel_tol = 1e-8;
  int max_newton = 50;
};

struct CorrectorSolution {
  double lambda = 0.0;
  Vector z;
  FieldVector psi;
  double residual = 0.0;
  int newton_iters = 0;
  /// Kernel-direction component Z^T dE(u) of the full equation; the reduced gradient.
  Vector multiplier;
};

enum class HessianRoute { exact, pencil_form, frozen_complement };

class ReducedModel {
 public:
  ReducedModel(std::shared_ptr<const ParameterFamily> family, KernelFrame frame,
               const ReductionOptions& options = {});

  const KernelFrame& frame() const { return frame_; }
  const ParameterFamily& family() const { return *family_; }
  std::shared_ptr<const ParameterFamily> shared_family() const { return family_; }
  const ReductionOptions& options() const { return options_; }
  double lambda_star() const { return frame_.lambda_star; }
  double ball_radius() const { return ball_radius_; }
  double lambda_halfwidth() const { return halfwidth_; }
  const FieldVector& base() const { return u0_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  CorrectorSolution solve_corrector(double lambda, const Vector& z);
  /// d_z psi(lambda, 0): (n x d), columns in the complement of H0.
  Matrix corrector_linearization(double lambda) const;

  double reduced_value(double lambda, const Vector& z);
  Vector reduced_gradient(double lambda, const Vector& z);
  /// Hessian of the reduced functional at z.
  Matrix reduced_hessian(double lambda, const Vector& z);
  Matrix reduced_hessian_origin(double lambda, HessianRoute route = HessianRoute::exact) const;

  /// u = u0 + Z z + psi(lambda, z); throws PreconditionError if the full
  /// residual exceeds lift_tol.
  FieldVector lift(double lambda, const Vector& z);
  /// Full residual ||grad E_lambda(u)||_H of the lifted state.
  double lift_residual(double lambda, const Vector& z);

  std::size_t cache_size() const { return cache_.size(); }
  void clear_cache() { cache_.clear(); }

 private:
  void check_box(double lambda, const Vector& z) const;
  /// Solves [J MZ; Z^T M 0] [x; c] = [rhs; 0].
  Matrix bordered_solve(const SparseMatrix& J, const Matrix& rhs) const;
  bool newton(double lambda, const Vector& z, FieldVector& psi, CorrectorSolution& out) const;
  FieldVector state(const Vector& z, const FieldVector& psi) const;
  std::vector<long long> cache_key(double lambda, const Vector& z) const;

  std::shared_ptr<const ParameterFamily> family_;
  KernelFrame frame_;
  ReductionOptions options_;
  FieldVector u0_;
  Matrix MZ_;
  double ball_radius_ = 1.0;
  double halfwidth_ = 1.0;
  std::map<std::vector<long long>, FieldVector> cache_;
  std::map<long long, Matrix> predictor_;
  std::vector<std::string> warnings_;
};

/// Distance from lambda* to the nearest other eigenvalue of the linearized
/// family, measured on the dense spectrum of the Hessian derivative pencil.
double eigenvalue_separation(const ParameterFamily& family, double lambda_star, double kernel_tol = 1e-8);

}  // namespace varbif
