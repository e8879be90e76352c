#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "varbif/errors.hpp"
#include "varbif/numfmt.hpp"
#include "varbif/problems.hpp"

namespace varbif {

namespace {

using Scalar1 = std::function<double(double)>;

struct Potential {
  Scalar1 f, f1, f2;
};

Potential polynomial(std::vector<double> c) {
  auto eval = [](const std::vector<double>& a, double u) {
    double v = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) v = v * u + *it;
    return v;
  };
  auto derive = [](const std::vector<double>& a) {
    std::vector<double> d;
    for (std::size_t k = 1; k < a.size(); ++k) d.push_back(static_cast<double>(k) * a[k]);
    return d;
  };
  const auto c1 = derive(c);
  const auto c2 = derive(c1);
  return {[=](double u) { return eval(c, u); }, [=](double u) { return eval(c1, u); },
          [=](double u) { return eval(c2, u); }};
}

// F = (a/2)|p|^2 + f(u) on slots [u, p_1..p_n].
Integrand dirichlet_plus(int dim, double a, Potential pot) {
  Integrand F;
  F.value = [=](const Point&, const Vector& s) { return 0.5 * a * s.tail(dim).squaredNorm() + pot.f(s[0]); };
  F.gradient = [=](const Point&, const Vector& s) {
    Vector g(1 + dim);
    g[0] = pot.f1(s[0]);
    g.tail(dim) = a * s.tail(dim);
    return g;
  };
  F.hessian = [=](const Point&, const Vector& s) {
    Matrix h = Matrix::Zero(1 + dim, 1 + dim);
    h(0, 0) = pot.f2(s[0]);
    h.bottomRightCorner(dim, dim) = a * Matrix::Identity(dim, dim);
    return h;
  };
  return F;
}

// sqrt(1 + |p|^2) - mu u
Integrand graph_area(int dim, double mu) {
  Integrand F;
  F.value = [=](const Point&, const Vector& s) {
    return std::sqrt(1.0 + s.tail(dim).squaredNorm()) - mu * s[0];
  };
  F.gradient = [=](const Point&, const Vector& s) {
    Vector g(1 + dim);
    g[0] = -mu;
    g.tail(dim) = s.tail(dim) / std::sqrt(1.0 + s.tail(dim).squaredNorm());
    return g;
  };
  F.hessian = [=](const Point&, const Vector& s) {
    const Vector p = s.tail(dim);
    const double w = 1.0 + p.squaredNorm();
    Matrix h = Matrix::Zero(1 + dim, 1 + dim);
    h.bottomRightCorner(dim, dim) = (w * Matrix::Identity(dim, dim) - p * p.transpose()) / std::pow(w, 1.5);
    return h;
  };
  return F;
}

Integrand slot_potential(Potential pot) {
  Integrand K;
  K.value = [=](const Point&, const Vector& s) { return pot.f(s[0]); };
  K.gradient = [=](const Point&, const Vector& s) { return Vector::Constant(1, pot.f1(s[0])); };
  K.hessian = [=](const Point&, const Vector& s) { return Matrix::Constant(1, 1, pot.f2(s[0])); };
  return K;
}

Integrand half_square(double shift = 0.0) {
  return slot_potential({[=](double u) { return 0.5 * (u + shift) * (u + shift); },
                         [=](double u) { return u + shift; }, [](double) { return 1.0; }});
}

constexpr double pi = std::numbers::pi;

struct Entry {
  std::string summary;
  std::vector<ParamInfo> params;
  Domain domain;
  std::function<BuiltinProblem(const ParamMap&, const Domain&)> make;
};

ProblemSpec base_spec(const std::string& name, const Domain& domain) {
  ProblemSpec spec;
  spec.name = name;
  spec.domain = domain;
  spec.components = 1;
  spec.order = 1;
  return spec;
}

const std::map<std::string, Entry>& registry() {
  static const std::map<std::string, Entry> reg = [] {
    std::map<std::string, Entry> r;
    r["linear_dirichlet"] = {
        "F = 1/2 |Du|^2, K = 1/2 u^2; the Dirichlet Laplacian pencil",
        {},
        Domain::interval(0.0, pi),
        [](const ParamMap&, const Domain& d) {
          BuiltinProblem b;
          b.spec = base_spec("linear_dirichlet", d);
          b.spec.F = dirichlet_plus(d.dimension(), 1.0, polynomial({0.0}));
          b.spec.K = half_square();
          b.spec.coercivity_constant = 1.0;
          b.references = {
              {"pencil eigenvalues on (0,pi)", "k^2, k = 1, 2, ...",
               "separation of variables: sin(kx) solves -u'' = k^2 u with u(0) = u(pi) = 0"},
              {"pencil eigenvalues on (0,pi)^2", "j^2 + k^2 (5 is double)",
               "product eigenfunctions sin(jx) sin(ky)"}};
          return b;
        }};
    r["pitchfork"] = {
        "F = 1/2 |Du|^2 + c/4 u^4, K = 1/2 u^2; odd, supercritical at every eigenvalue",
        {{"c", 1.0, "quartic coefficient"}},
        Domain::interval(0.0, pi),
        [](const ParamMap& p, const Domain& d) {
          const double c = p.at("c");
          BuiltinProblem b;
          b.spec = base_spec("pitchfork", d);
          b.spec.F = dirichlet_plus(d.dimension(), 1.0, polynomial({0.0, 0.0, 0.0, 0.0, 0.25 * c}));
          b.spec.K = half_square();
          b.spec.symmetry = Symmetry::odd;
          b.spec.coercivity_constant = 1.0;
          b.references = {
              {"bifurcation values", "k^2", "linearization at 0 is the Dirichlet pencil"},
              {"first branch amplitude", "a^2 = (4/3)(lambda - 1)/c for u ~ a sin x",
               "first-order perturbation expansion; cross-checked by RK4 shooting"}};
          return b;
        }};
    r["transcritical"] = {
        "F = 1/2 |Du|^2 + c/3 u^3, K = 1/2 u^2; branches cross lambda = 1",
        {{"c", 1.0, "cubic coefficient"}},
        Domain::interval(0.0, pi),
        [](const ParamMap& p, const Domain& d) {
          const double c = p.at("c");
          BuiltinProblem b;
          b.spec = base_spec("transcritical", d);
          b.spec.F = dirichlet_plus(d.dimension(), 1.0, polynomial({0.0, 0.0, 0.0, c / 3.0}));
          b.spec.K = half_square();
          b.spec.coercivity_constant = 1.0;
          b.references = {{"first branch amplitude", "a = (3 pi / 8)(lambda - 1)/c for u ~ a sin x",
                           "first-order perturbation expansion; cross-checked by RK4 shooting"}};
          return b;
        }};
    r["mean_curvature"] = {
        "F = sqrt(1 + |Du|^2) - mu u, K = 1/2 (u + u0)^2; graph-area integrand",
        {{"mu", 0.0, "load coefficient"}, {"u0", 0.0, "constant shift inside K"}},
        Domain::interval(0.0, pi),
        [](const ParamMap& p, const Domain& d) {
          BuiltinProblem b;
          b.spec = base_spec("mean_curvature", d);
          b.spec.F = graph_area(d.dimension(), p.at("mu"));
          b.spec.K = half_square(p.at("u0"));
          b.spec.gradient_warning_threshold = 10.0;
          b.references = {
              {"Hessian of F at u = 0", "the gram (stiffness) matrix",
               "(delta_ij (1+|p|^2) - p_i p_j)(1+|p|^2)^(-3/2) is the identity at p = 0"},
              {"coercivity margin", "(1 + max|Du|^2)^(-3/2)", "smallest eigenvalue of the top-order block"}};
          return b;
        }};
    r["square_odd_cubic"] = {
        "F = 1/2 |Du|^2 + c/4 u^4, K = 1/2 u^2 on (0,pi)^2; double eigenvalue 5",
        {{"c", 1.0, "quartic coefficient"}},
        Domain::rectangle(0.0, pi, 0.0, pi),
        [](const ParamMap& p, const Domain& d) {
          BuiltinProblem b;
          b.spec = base_spec("square_odd_cubic", d);
          b.spec.F = dirichlet_plus(d.dimension(), 1.0, polynomial({0.0, 0.0, 0.0, 0.0, 0.25 * p.at("c")}));
          b.spec.K = half_square();
          b.spec.symmetry = Symmetry::odd;
          b.spec.coercivity_constant = 1.0;
          b.references = {
              {"kernel at lambda = 5", "span{sin x sin 2y, sin 2x sin y}", "product eigenfunctions"},
              {"branch pairs right of 5", "4 (two coordinate modes, two diagonal modes)",
               "critical directions of the reduced quartic on the kernel circle"}};
          return b;
        }};
    r["scaled_quadratic"] = {
        "F = 1/2 |Du|^2 - lambda0/2 u^2 on (0,1); deformation family",
        {{"lambda0", 6.25 * pi * pi, "potential strength"}},
        Domain::interval(0.0, 1.0),
        [](const ParamMap& p, const Domain& d) {
          const double l0 = p.at("lambda0");
          BuiltinProblem b;
          b.spec = base_spec("scaled_quadratic", d);
          b.spec.F = dirichlet_plus(d.dimension(), 1.0, polynomial({0.0, 0.0, -0.5 * l0}));
          b.spec.K = half_square();
          b.spec.symmetry = Symmetry::odd;
          b.spec.coercivity_constant = 1.0;
          b.references = {{"conjugate times", "t_k = k pi / sqrt(lambda0) <= 1",
                           "scaling of the Dirichlet spectrum of (0,t)"}};
          return b;
        }};
    r["scaled_pendulum"] = {
        "F = 1/2 |Du|^2 - lambda0 (1 - cos u) on (0,1); deformation family",
        {{"lambda0", 2.25 * pi * pi, "pendulum strength"}},
        Domain::interval(0.0, 1.0),
        [](const ParamMap& p, const Domain& d) {
          const double l0 = p.at("lambda0");
          BuiltinProblem b;
          b.spec = base_spec("scaled_pendulum", d);
          b.spec.F = dirichlet_plus(d.dimension(), 1.0,
                                    {[=](double u) { return -l0 * (1.0 - std::cos(u)); },
                                     [=](double u) { return -l0 * std::sin(u); },
                                     [=](double u) { return -l0 * std::cos(u); }});
          b.spec.K = half_square();
          b.spec.symmetry = Symmetry::odd;
          b.spec.coercivity_constant = 1.0;
          b.references = {{"first conjugate time", "pi / sqrt(lambda0)", "linearization u'' + t^2 lambda0 u = 0"},
                          {"branch amplitude", "max|u| ~ sqrt(16 (t - t*)/t*)",
                           "elliptic-integral period expansion; cross-checked by RK4 shooting"}};
          return b;
        }};
    return r;
  }();
  return reg;
}

const Entry& lookup(const std::string& name) {
  const auto& reg = registry();
  auto it = reg.find(name);
  if (it == reg.end()) {
    std::string known;
    for (const auto& [k, v] : reg) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError("unknown builtin problem '" + name + "' (known: " + known + ")");
  }
  return it->second;
}

}  // namespace

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

std::vector<ParamInfo> builtin_parameters(const std::string& name) { return lookup(name).params; }

BuiltinProblem builtin(const std::string& name, const ParamMap& params, const std::optional<Domain>& domain) {
  const Entry& e = lookup(name);
  ParamMap full;
  for (const auto& p : e.params) full[p.name] = p.default_value;
  for (const auto& [k, v] : params) {
    if (!full.count(k)) throw ConfigError("builtin '" + name + "' has no parameter '" + k + "'");
    if (!std::isfinite(v)) throw ConfigError("parameter '" + k + "' is not finite");
    full[k] = v;
  }
  BuiltinProblem b = e.make(full, domain.value_or(e.domain));
  b.name = name;
  b.summary = e.summary;
  b.params = full;
  validate_problem(b.spec);
  return b;
}

ProblemSpec polynomial_problem(const Domain& domain, double grad_coefficient, const std::vector<double>& f_poly,
                               const std::vector<double>& k_poly, Symmetry symmetry) {
  if (!(grad_coefficient > 0.0)) throw ConfigError("gradient coefficient must be positive");
  ProblemSpec spec = base_spec("polynomial", domain);
  spec.F = dirichlet_plus(domain.dimension(), grad_coefficient, polynomial(f_poly.empty() ? std::vector<double>{0.0} : f_poly));
  spec.K = slot_potential(polynomial(k_poly.empty() ? std::vector<double>{0.0} : k_poly));
  spec.symmetry = symmetry;
  spec.coercivity_constant = grad_coefficient;
  validate_problem(spec);
  return spec;
}

}  // namespace varbif
