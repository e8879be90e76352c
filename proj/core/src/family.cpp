#include <cmath>

#include "varbif/family.hpp"

namespace varbif {

SparseMatrix ParameterFamily::hessian_derivative(double p, const FieldVector& u) const {
  const double h = 1e-5 * std::max(1.0, std::abs(p));
  SparseMatrix d = hessian(p + h, u) - hessian(p - h, u);
  d *= 0.5 / h;
  return d;
}

FieldVector ParameterFamily::gradient(double p, const FieldVector& u) const {
  return discretization().gram_solve(load(p, u));
}

double ParameterFamily::residual(double p, const FieldVector& u) const {
  return discretization().dual_norm(load(p, u));
}

PencilFamily::PencilFamily(std::shared_ptr<const Discretization> disc, ProblemSpec problem)
    : disc_(std::move(disc)), problem_(std::move(problem)) {
  validate_problem(problem_);
}

FieldVector PencilFamily::base_state() const { return varbif::base_state(*disc_, problem_); }

double PencilFamily::energy(double p, const FieldVector& u) const {
  return varbif::energy(*disc_, problem_, u, Which::F) - p * varbif::energy(*disc_, problem_, u, Which::K);
}

Vector PencilFamily::load(double p, const FieldVector& u) const {
  return assemble_load(*disc_, problem_, u, Which::F) - p * assemble_load(*disc_, problem_, u, Which::K);
}

SparseMatrix PencilFamily::hessian(double p, const FieldVector& u) const {
  SparseMatrix B = assemble_hessian(*disc_, problem_, u, Which::F).B;
  B -= p * assemble_hessian(*disc_, problem_, u, Which::K).B;
  return B;
}

SparseMatrix PencilFamily::hessian_derivative(double, const FieldVector& u) const {
  return -assemble_hessian(*disc_, problem_, u, Which::K).B;
}

DiscreteOperatorSet PencilFamily::operators() const {
  return assemble_operators(*disc_, problem_, base_state());
}

}  // namespace varbif
