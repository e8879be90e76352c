#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "varbif/errors.hpp"
#include "varbif/numfmt.hpp"
#include "varbif/reduction.hpp"
#include "varbif/slicing.hpp"
#include "varbif/spectrum.hpp"

namespace varbif {

Vector KernelFrame::coordinates(const FieldVector& v) const { return Z.transpose() * (gram * v); }

FieldVector KernelFrame::project(const FieldVector& v) const { return Z * coordinates(v); }

FieldVector KernelFrame::complement(const FieldVector& v) const { return v - project(v); }

KernelFrame kernel_frame(const ParameterFamily& family, double lambda_star, double kernel_tol,
                         int dense_limit) {
  const Discretization& disc = family.discretization();
  const SparseMatrix H = family.hessian(lambda_star, family.base_state());
  KernelFrame frame;
  frame.lambda_star = lambda_star;
  frame.gram = disc.gram();
  Matrix V;
  if (disc.size() <= dense_limit) {
    const FormSpectrum spec = form_spectrum(H, disc.gram(), true);
    const double thr = kernel_tol * spec.values.cwiseAbs().maxCoeff();
    std::vector<int> idx;
    for (int k = 0; k < spec.values.size(); ++k)
      if (std::abs(spec.values[k]) <= thr) idx.push_back(k);
    V.resize(disc.size(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) V.col(static_cast<Eigen::Index>(k)) = spec.vectors.col(idx[k]);
  } else {
    const double thr = kernel_tol * estimate_spectral_radius(H, disc.gram());
    V = slice_eigen(H, disc.gram(), {-thr, thr}, 2.0 * thr, true).vectors;
  }
  if (V.cols() == 0)
    throw PreconditionError("not a candidate point: the Hessian at " + family.parameter_name() + " = " +
                            format_double(lambda_star) + " has no numerical kernel");
  Matrix G = V.transpose() * (disc.gram() * V);
  G = 0.5 * (G + G.transpose()).eval();
  Eigen::LLT<Matrix> llt(G);
  frame.Z = llt.matrixL().solve(V.transpose()).transpose();
  // Fix the sign of each column so the largest entry is positive.
  for (int j = 0; j < frame.Z.cols(); ++j) {
    Eigen::Index imax = 0;
    frame.Z.col(j).cwiseAbs().maxCoeff(&imax);
    if (frame.Z(imax, j) < 0.0) frame.Z.col(j) *= -1.0;
  }
  return frame;
}

double eigenvalue_separation(const ParameterFamily& family, double lambda_star, double kernel_tol) {
  const FieldVector u0 = family.base_state();
  const SparseMatrix A = family.hessian(lambda_star, u0);
  SparseMatrix C = -family.hessian_derivative(lambda_star, u0);
  const SparseMatrix& M = family.discretization().gram();
  const Vector c = form_spectrum(C, M, false).values;
  const double cscale = c.cwiseAbs().maxCoeff();
  if (c.maxCoeff() < -kernel_tol * cscale) {
    C = -C;
  } else if (c.minCoeff() <= kernel_tol * cscale) {
    throw PreconditionError("the parameter derivative of the Hessian is not definite; pass an explicit "
                            "parameter half-width");
  }
  // A v = sigma C v with sigma = p - lambda*, first order in p.
  const Vector sigma = dense_definite_eigen(Matrix(A), Matrix(C), false).values;
  const double floor = 1e-6 * std::max(1.0, std::abs(lambda_star));
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < sigma.size(); ++k)
    if (std::abs(sigma[k]) > floor) best = std::min(best, std::abs(sigma[k]));
  if (!std::isfinite(best)) throw PreconditionError("linearized family has no other eigenvalue");
  return best;
}

ReducedModel::ReducedModel(std::shared_ptr<const ParameterFamily> family, KernelFrame frame,
                           const ReductionOptions& options)
    : family_(std::move(family)), frame_(std::move(frame)), options_(options) {
  if (frame_.dimension() < 1) throw PreconditionError("kernel frame is empty");
  if (frame_.dimension() > 4)
    throw ConfigError("kernel dimension " + std::to_string(frame_.dimension()) +
                      " exceeds the supported maximum of 4");
  if (!(options_.ball_radius > 0.0)) throw ConfigError("ball radius must be positive");
  u0_ = family_->base_state();
  MZ_ = frame_.gram * frame_.Z;
  ball_radius_ = options_.ball_radius;
  halfwidth_ = options_.lambda_halfwidth ? *options_.lambda_halfwidth
                                         : 0.4 * eigenvalue_separation(*family_, frame_.lambda_star,
                                                                       options_.kernel_tol);
}

void ReducedModel::check_box(double lambda, const Vector& z) const {
  if (z.size() != frame_.dimension())
    throw ConfigError("reduced coordinates have length " + std::to_string(z.size()) + ", expected " +
                      std::to_string(frame_.dimension()));
  if (z.norm() > ball_radius_ * (1.0 + 1e-12))
    throw PreconditionError("|z| = " + format_double(z.norm()) + " exceeds the ball radius " +
                            format_double(ball_radius_));
  if (std::abs(lambda - frame_.lambda_star) > halfwidth_ * (1.0 + 1e-12))
    throw PreconditionError(family_->parameter_name() + " = " + format_double(lambda) +
                            " is outside the reduction window of half-width " + format_double(halfwidth_));
}

FieldVector ReducedModel::state(const Vector& z, const FieldVector& psi) const {
  return u0_ + frame_.Z * z + psi;
}

Matrix ReducedModel::bordered_solve(const SparseMatrix& J, const Matrix& rhs) const {
  const int n = static_cast<int>(J.rows());
  const int d = frame_.dimension();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(J.nonZeros() + 2 * n * d));
  for (int k = 0; k < J.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(J, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < n; ++i) {
      const double v = MZ_(i, j);
      if (v == 0.0) continue;
      trip.emplace_back(i, n + j, v);
      trip.emplace_back(n + j, i, v);
    }
  SparseMatrix K(n + d, n + d);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success)
    throw ConvergenceError("bordered corrector system is singular; the complement block is not invertible");
  Matrix full = Matrix::Zero(n + d, rhs.cols());
  full.topRows(n) = rhs;
  Matrix sol = lu.solve(full);
  if (lu.info() != Eigen::Success || !sol.allFinite())
    throw ConvergenceError("bordered corrector solve failed");
  return sol;
}

bool ReducedModel::newton(double lambda, const Vector& z, FieldVector& psi, CorrectorSolution& out) const {
  const Discretization& disc = family_->discretization();
  auto residual_of = [&](const FieldVector& p, Vector& c, Vector& r) {
    const Vector G = family_->load(lambda, state(z, p));
    c = frame_.Z.transpose() * G;
    r = G - MZ_ * c;
    return disc.dual_norm(r);
  };
  Vector c, r;
  double res = residual_of(psi, c, r);
  for (int it = 0; it <= options_.max_newton; ++it) {
    if (res <= options_.corrector_tol) {
      out.psi = psi;
      out.residual = res;
      out.newton_iters = it;
      out.multiplier = c;
      return true;
    }
    if (it == options_.max_newton || !std::isfinite(res)) break;
    const SparseMatrix J = family_->hessian(lambda, state(z, psi));
    const Matrix sol = bordered_solve(J, -r);
    const Vector step = sol.topRows(J.rows()).col(0);
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k) {
      FieldVector trial = psi + alpha * step;
      trial -= frame_.Z * frame_.coordinates(trial);
      Vector ct, rt;
      const double rest = residual_of(trial, ct, rt);
      if (std::isfinite(rest) && rest * rest <= (1.0 - 1e-4 * alpha) * res * res) {
        psi = trial;
        res = rest;
        c = ct;
        r = rt;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  out.residual = res;
  return false;
}

std::vector<long long> ReducedModel::cache_key(double lambda, const Vector& z) const {
  std::vector<long long> key;
  key.push_back(std::llround((lambda - frame_.lambda_star) / (halfwidth_ / 20.0)));
  for (int j = 0; j < z.size(); ++j) key.push_back(std::llround(z[j] / (ball_radius_ / 20.0)));
  return key;
}

CorrectorSolution ReducedModel::solve_corrector(double lambda, const Vector& z) {
  check_box(lambda, z);
  CorrectorSolution out;
  out.lambda = lambda;
  out.z = z;
  if (z.norm() == 0.0) {
    out.psi = FieldVector::Zero(u0_.size());
    const Vector G = family_->load(lambda, u0_);
    out.multiplier = frame_.Z.transpose() * G;
    out.residual = family_->discretization().dual_norm(G - MZ_ * out.multiplier);
    return out;
  }
  const auto key = cache_key(lambda, z);
  FieldVector psi;
  if (auto hit = cache_.find(key); hit != cache_.end()) {
    psi = hit->second;
  } else {
    auto pred = predictor_.find(key.front());
    if (pred == predictor_.end()) pred = predictor_.emplace(key.front(), corrector_linearization(lambda)).first;
    psi = pred->second * z;
  }
  if (!newton(lambda, z, psi, out)) {
    const double failed = out.residual;
    ball_radius_ *= 0.5;
    warnings_.push_back("corrector Newton failed at " + family_->parameter_name() + " = " +
                        format_double(lambda) + " (residual " + format_double(failed) +
                        "); ball radius reduced to " + format_double(ball_radius_));
    if (z.norm() > ball_radius_)
      throw ConvergenceError("corrector did not converge at |z| = " + format_double(z.norm()) +
                             " (residual " + format_double(failed) + ")");
    psi = FieldVector::Zero(u0_.size());
    if (!newton(lambda, z, psi, out))
      throw ConvergenceError("corrector did not converge after reducing the ball radius (residual " +
                             format_double(out.residual) + ")");
  }
  cache_[key] = out.psi;
  return out;
}

Matrix ReducedModel::corrector_linearization(double lambda) const {
  const SparseMatrix J = family_->hessian(lambda, u0_);
  const Matrix rhs = -(J * frame_.Z);
  return bordered_solve(J, rhs).topRows(J.rows());
}

double ReducedModel::reduced_value(double lambda, const Vector& z) {
  const CorrectorSolution sol = solve_corrector(lambda, z);
  return family_->energy(lambda, state(z, sol.psi));
}

Vector ReducedModel::reduced_gradient(double lambda, const Vector& z) {
  return solve_corrector(lambda, z).multiplier;
}

Matrix ReducedModel::reduced_hessian(double lambda, const Vector& z) {
  const CorrectorSolution sol = solve_corrector(lambda, z);
  const SparseMatrix J = family_->hessian(lambda, state(z, sol.psi));
  const Matrix JZ = J * frame_.Z;
  const Matrix X = bordered_solve(J, -JZ).topRows(J.rows());
  Matrix H = frame_.Z.transpose() * (J * (frame_.Z + X));
  return 0.5 * (H + H.transpose());
}

Matrix ReducedModel::reduced_hessian_origin(double lambda, HessianRoute route) const {
  const double ls = frame_.lambda_star;
  Matrix H;
  switch (route) {
    case HessianRoute::exact: {
      const SparseMatrix J = family_->hessian(lambda, u0_);
      const Matrix X = bordered_solve(J, -(J * frame_.Z)).topRows(J.rows());
      H = frame_.Z.transpose() * (J * (frame_.Z + X));
      break;
    }
    case HessianRoute::pencil_form: {
      const SparseMatrix D = family_->hessian_derivative(ls, u0_);
      const Matrix X = corrector_linearization(ls);
      H = (lambda - ls) * (frame_.Z.transpose() * (D * (frame_.Z + X)));
      break;
    }
    case HessianRoute::frozen_complement: {
      const SparseMatrix Js = family_->hessian(ls, u0_);
      const SparseMatrix J = family_->hessian(lambda, u0_);
      const Matrix X = bordered_solve(Js, -(J * frame_.Z)).topRows(J.rows());
      H = frame_.Z.transpose() * (J * (frame_.Z + X));
      break;
    }
  }
  return 0.5 * (H + H.transpose());
}

double ReducedModel::lift_residual(double lambda, const Vector& z) {
  const CorrectorSolution sol = solve_corrector(lambda, z);
  return family_->residual(lambda, state(z, sol.psi));
}

FieldVector ReducedModel::lift(double lambda, const Vector& z) {
  const CorrectorSolution sol = solve_corrector(lambda, z);
  const FieldVector u = state(z, sol.psi);
  const double res = family_->residual(lambda, u);
  if (res > options_.lift_tol)
    throw PreconditionError("correspondence violation: lifted state has full residual " + format_double(res) +
                            " > lift_tol " + format_double(options_.lift_tol) + "; the ball radius is too large");
  return u;
}

}  // namespace varbif
