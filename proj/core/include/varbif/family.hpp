#pragma once

#include <memory>
#include <string>

#include "varbif/assembly.hpp"

namespace varbif {

/// A one-parameter family of functionals E_p on a fixed discrete space. Every
/// member shares the base state as a critical point.
class ParameterFamily {
 public:
  virtual ~ParameterFamily() = default;

  virtual const Discretization& discretization() const = 0;
  virtual FieldVector base_state() const = 0;
  virtual bool odd() const = 0;
  virtual std::string parameter_name() const = 0;

  virtual double energy(double p, const FieldVector& u) const = 0;
  /// dE_p(u) as a load (dual) vector.
  virtual Vector load(double p, const FieldVector& u) const = 0;
  virtual SparseMatrix hessian(double p, const FieldVector& u) const = 0;
  /// d/dp of the Hessian; central differences unless overridden.
  virtual SparseMatrix hessian_derivative(double p, const FieldVector& u) const;

  /// Gram-geometry gradient M^{-1} dE_p(u).
  FieldVector gradient(double p, const FieldVector& u) const;
  /// ||grad E_p(u)||_H
  double residual(double p, const FieldVector& u) const;
};

/// E_lambda = F - lambda K for a problem on a discretization.
class PencilFamily : public ParameterFamily {
 public:
  PencilFamily(std::shared_ptr<const Discretization> disc, ProblemSpec problem);

  const Discretization& discretization() const override { return *disc_; }
  std::shared_ptr<const Discretization> shared_discretization() const { return disc_; }
  const ProblemSpec& problem() const { return problem_; }
  FieldVector base_state() const override;
  bool odd() const override { return problem_.symmetry == Symmetry::odd; }
  std::string parameter_name() const override { return "lambda"; }

  double energy(double p, const FieldVector& u) const override;
  Vector load(double p, const FieldVector& u) const override;
  SparseMatrix hessian(double p, const FieldVector& u) const override;
  SparseMatrix hessian_derivative(double p, const FieldVector& u) const override;

  DiscreteOperatorSet operators() const;

 private:
  std::shared_ptr<const Discretization> disc_;
  ProblemSpec problem_;
};

}  // namespace varbif
