#include <algorithm>
#include <cmath>

#include "varbif/deformation.hpp"
#include "varbif/errors.hpp"
#include "varbif/numfmt.hpp"
#include "varbif/slicing.hpp"
#include "varbif/spectrum.hpp"

namespace varbif {

ProblemSpec pullback(const ProblemSpec& problem, double t, double t_min) {
  if (!(t > t_min) || t > 1.0 + 1e-12)
    throw PreconditionError("scale t = " + format_double(t) + " is outside (" + format_double(t_min) + ", 1]");
  const int n = problem.domain.dimension();
  const int N = problem.components;
  const double tn = std::pow(t, n);
  Vector S = Vector::Ones(problem.slot_count(Which::F));
  S.tail(N * n).setConstant(1.0 / t);

  ProblemSpec out = problem;
  const Integrand F = problem.F;
  const Integrand K = problem.K;
  out.F.value = [=](const Point& x, const Vector& s) { return tn * F.value(t * x, S.cwiseProduct(s)); };
  out.F.gradient = [=](const Point& x, const Vector& s) {
    return Vector(tn * S.cwiseProduct(F.gradient(t * x, S.cwiseProduct(s))));
  };
  out.F.hessian = [=](const Point& x, const Vector& s) {
    return Matrix(tn * S.asDiagonal() * F.hessian(t * x, S.cwiseProduct(s)) * S.asDiagonal());
  };
  out.K.value = [=](const Point& x, const Vector& s) { return tn * K.value(t * x, s); };
  out.K.gradient = [=](const Point& x, const Vector& s) { return Vector(tn * K.gradient(t * x, s)); };
  out.K.hessian = [=](const Point& x, const Vector& s) { return Matrix(tn * K.hessian(t * x, s)); };
  if (problem.base_state) {
    auto u0 = problem.base_state;
    out.base_state = [=](const Point& x, int i) { return u0(t * x, i); };
  }
  return out;
}

ScaledFamily::ScaledFamily(std::shared_ptr<const Discretization> disc, ProblemSpec base, double t_min)
    : disc_(std::move(disc)), base_(std::move(base)), t_min_(t_min) {
  validate_problem(base_);
}

FieldVector ScaledFamily::base_state() const { return varbif::base_state(*disc_, base_); }

double ScaledFamily::energy(double t, const FieldVector& u) const {
  return varbif::energy(*disc_, pullback(base_, t, t_min_), u, Which::F);
}

Vector ScaledFamily::load(double t, const FieldVector& u) const {
  return assemble_load(*disc_, pullback(base_, t, t_min_), u, Which::F);
}

SparseMatrix ScaledFamily::hessian(double t, const FieldVector& u) const {
  return assemble_hessian(*disc_, pullback(base_, t, t_min_), u, Which::F).B;
}

ConjugatePointReport conjugate_points(const ParameterFamily& family, std::vector<double> t_grid,
                                      const ConjugateOptions& options) {
  if (t_grid.size() < 2) throw ConfigError("conjugate point search needs at least two grid points");
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] > t_grid[k - 1]))
      throw ConfigError("t grid must be strictly increasing");
  const Discretization& disc = family.discretization();
  const SparseMatrix& M = disc.gram();
  const FieldVector u0 = family.base_state();

  auto threshold = [&](const SparseMatrix& H) { return options.kernel_tol * estimate_spectral_radius(H, M); };
  auto mu_at = [&](double t) {
    return count_below(family.hessian(t, u0), M, 0.0);
  };
  auto nu_at = [&](double t) {
    const SparseMatrix H = family.hessian(t, u0);
    const double thr = threshold(H);
    return count_below(H, M, thr) - count_below(H, M, -thr);
  };

  ConjugatePointReport rep;
  rep.t_grid = t_grid;
  for (double t : t_grid) {
    rep.mu.push_back(mu_at(t));
    if (options.record_eigenvalues > 0 && disc.size() <= 4096) {
      Vector e = form_spectrum(family.hessian(t, u0), M, false).values;
      std::sort(e.data(), e.data() + e.size());
      rep.smallest_eigenvalues.push_back(e.head(std::min<Eigen::Index>(options.record_eigenvalues, e.size())));
    }
  }

  struct Bracket {
    double a, b;
    int ma, mb, depth;
  };
  std::vector<ConjugateTime> found;
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    std::vector<Bracket> stack{{t_grid[k - 1], t_grid[k], rep.mu[k - 1], rep.mu[k], 0}};
    while (!stack.empty()) {
      const Bracket br = stack.back();
      stack.pop_back();
      if (br.ma == br.mb) continue;
      const double mid = 0.5 * (br.a + br.b);
      if (br.depth >= options.bisection_steps || mid <= br.a || mid >= br.b) {
        found.push_back({mid, nu_at(mid), br.mb - br.ma});
        continue;
      }
      const int mm = mu_at(mid);
      stack.push_back({mid, br.b, mm, br.mb, br.depth + 1});
      stack.push_back({br.a, mid, br.ma, mm, br.depth + 1});
    }
  }
  std::sort(found.begin(), found.end(), [](const ConjugateTime& x, const ConjugateTime& y) { return x.t < y.t; });
  rep.conjugate_times = found;
  rep.mu_start = rep.mu.back();
  rep.mu_end = rep.mu.front();
  int total = 0;
  for (const auto& c : found) total += c.nu;
  rep.smale_defect = rep.mu_start - rep.mu_end - total;
  return rep;
}

DeformationBranching deformation_bifurcation(std::shared_ptr<const ScaledFamily> family, double t_star,
                                             const ReductionOptions& reduction, const BranchSearchOptions& search,
                                             const std::vector<double>& offsets) {
  DeformationBranching out;
  out.t_star = t_star;
  KernelFrame frame = kernel_frame(*family, t_star, reduction.kernel_tol);
  out.nu = frame.dimension();
  ReducedModel model(family, std::move(frame), reduction);
  std::vector<double> grid;
  for (double o : offsets) {
    for (double s : {-1.0, 1.0}) {
      const double t = t_star * (1.0 + s * o);
      if (t > family->t_min() && t <= 1.0 && std::abs(t - t_star) <= model.lambda_halfwidth()) grid.push_back(t);
    }
  }
  out.search = find_branches(model, grid, search);
  out.verdict = classify(out.search);
  return out;
}

}  // namespace varbif
