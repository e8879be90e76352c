#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "varbif/assembly.hpp"
#include "varbif/errors.hpp"

namespace varbif {

namespace {

std::string where(const Point& x, int dim) {
  std::ostringstream out;
  out.precision(17);
  out << "x=(" << x[0];
  if (dim == 2) out << ", " << x[1];
  out << ")";
  return out.str();
}

const char* label(Which which) { return which == Which::F ? "F" : "K"; }

const Integrand& integrand(const ProblemSpec& problem, Which which) {
  return which == Which::F ? problem.F : problem.K;
}

// Callback wrappers attach the quadrature location to any failure.
double eval_value(const ProblemSpec& p, Which which, const Point& x, const Vector& s) {
  double v = 0.0;
  try {
    v = integrand(p, which).value(x, s);
  } catch (const std::exception& e) {
    throw IntegrandError(std::string("integrand ") + label(which) + " value failed at " +
                         where(x, p.domain.dimension()) + ": " + e.what());
  }
  if (!std::isfinite(v))
    throw IntegrandError(std::string("integrand ") + label(which) + " value is not finite at " +
                         where(x, p.domain.dimension()));
  return v;
}

Vector eval_gradient(const ProblemSpec& p, Which which, const Point& x, const Vector& s) {
  Vector g;
  try {
    g = integrand(p, which).gradient(x, s);
  } catch (const std::exception& e) {
    throw IntegrandError(std::string("integrand ") + label(which) + " gradient failed at " +
                         where(x, p.domain.dimension()) + ": " + e.what());
  }
  if (g.size() != s.size() || !g.allFinite())
    throw IntegrandError(std::string("integrand ") + label(which) +
                         " gradient has wrong size or non-finite entries at " +
                         where(x, p.domain.dimension()));
  return g;
}

Matrix eval_hessian(const ProblemSpec& p, Which which, const Point& x, const Vector& s) {
  Matrix h;
  try {
    h = integrand(p, which).hessian(x, s);
  } catch (const std::exception& e) {
    throw IntegrandError(std::string("integrand ") + label(which) + " hessian failed at " +
                         where(x, p.domain.dimension()) + ": " + e.what());
  }
  if (h.rows() != s.size() || h.cols() != s.size() || !h.allFinite())
    throw IntegrandError(std::string("integrand ") + label(which) +
                         " hessian has wrong shape or non-finite entries at " +
                         where(x, p.domain.dimension()));
  const double asym = (h - h.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * std::max(1.0, h.cwiseAbs().maxCoeff()))
    throw IntegrandError(std::string("integrand ") + label(which) + " hessian is not symmetric at " +
                         where(x, p.domain.dimension()));
  return 0.5 * (h + h.transpose());
}

int unknown(const Discretization& disc, int component, int node) {
  return node < 0 ? -1 : component * disc.grid().interior_count() + node;
}

// Slot vector [xi0, xi1] of F on one element.
Vector element_slots(const Discretization& disc, const Discretization::Element& el,
                     const FieldVector& u) {
  const int N = disc.components();
  const int n = disc.grid().dimension();
  Vector s = Vector::Zero(N * (1 + n));
  for (int i = 0; i < N; ++i) {
    for (int v = 0; v < el.vertex_count; ++v) {
      const int k = unknown(disc, i, el.nodes[v]);
      if (k < 0) continue;
      s[i] += u[k] / el.vertex_count;
      for (int a = 0; a < n; ++a) s[N + i * n + a] += el.dgrad[a][v] * u[k];
    }
  }
  return s;
}

// d(slots)/d(local unknowns); local unknown index = i * vertex_count + v.
Matrix element_jacobian(const Discretization& disc, const Discretization::Element& el) {
  const int N = disc.components();
  const int n = disc.grid().dimension();
  Matrix J = Matrix::Zero(N * (1 + n), N * el.vertex_count);
  for (int i = 0; i < N; ++i) {
    for (int v = 0; v < el.vertex_count; ++v) {
      const int col = i * el.vertex_count + v;
      J(i, col) = 1.0 / el.vertex_count;
      for (int a = 0; a < n; ++a) J(N + i * n + a, col) = el.dgrad[a][v];
    }
  }
  return J;
}

void check_conforming(const Discretization& disc, const FieldVector& u) {
  if (u.size() != disc.size()) {
    std::ostringstream msg;
    msg << "field has " << u.size() << " entries, grid expects " << disc.size();
    throw PreconditionError(msg.str());
  }
}

}  // namespace

void validate_problem(const ProblemSpec& problem) {
  if (problem.order != 1)
    throw ConfigError("only first-order (m = 1) integrands are supported, got m = " +
                      std::to_string(problem.order));
  if (problem.components < 1) throw ConfigError("component count must be positive");
  for (int axis = 0; axis < problem.domain.dimension(); ++axis)
    if (!(problem.domain.lo[axis] < problem.domain.hi[axis]))
      throw ConfigError("domain bounds must satisfy a < b on every axis");
  for (const Integrand* f : {&problem.F, &problem.K})
    if (!f->value || !f->gradient || !f->hessian)
      throw ConfigError("problem '" + problem.name + "' is missing integrand callbacks");
  if (problem.coercivity_constant && !(*problem.coercivity_constant > 0.0))
    throw ConfigError("coercivity constant must be positive");
}

Discretization::Discretization(Grid grid, int components)
    : grid_(std::move(grid)), components_(components) {
  if (components_ < 1) throw ConfigError("component count must be positive");
  const int n = grid_.dimension();
  const double hx = grid_.width(0);
  if (n == 1) {
    for (int c = 0; c < grid_.cells(0); ++c) {
      Element el;
      el.vertex_count = 2;
      el.nodes = {grid_.flat_index({c, 0}), grid_.flat_index({c + 1, 0}), -1};
      el.x = 0.5 * (grid_.position({c, 0}) + grid_.position({c + 1, 0}));
      el.weight = hx;
      el.dgrad[0] = {-1.0 / hx, 1.0 / hx, 0.0};
      elements_.push_back(el);
    }
  } else {
    const double hy = grid_.width(1);
    for (int j = 0; j < grid_.cells(1); ++j) {
      for (int i = 0; i < grid_.cells(0); ++i) {
        // Lower-left and upper-right right triangles of the cell.
        const std::array<Grid::Node, 3> lower{{{i, j}, {i + 1, j}, {i, j + 1}}};
        const std::array<Grid::Node, 3> upper{{{i + 1, j + 1}, {i, j + 1}, {i + 1, j}}};
        const double sign[2] = {1.0, -1.0};
        int t = 0;
        for (const auto& tri : {lower, upper}) {
          Element el;
          el.vertex_count = 3;
          el.x = Point::Zero();
          for (int v = 0; v < 3; ++v) {
            el.nodes[v] = grid_.flat_index(tri[v]);
            el.x += grid_.position(tri[v]) / 3.0;
          }
          el.weight = 0.5 * hx * hy;
          const double s = sign[t++];
          el.dgrad[0] = {-s / hx, s / hx, 0.0};
          el.dgrad[1] = {-s / hy, 0.0, s / hy};
          elements_.push_back(el);
        }
      }
    }
  }

  const int nx = grid_.cells(0);
  const int ny = n == 2 ? grid_.cells(1) : 0;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      NodalPoint np;
      const Grid::Node node{i, n == 2 ? j : 0};
      np.node = grid_.flat_index(node);
      np.x = grid_.position(node);
      double w = grid_.cell_volume();
      if (i == 0 || i == nx) w *= 0.5;
      if (n == 2 && (j == 0 || j == ny)) w *= 0.5;
      np.weight = w;
      nodal_points_.push_back(np);
    }
  }
  nodal_weights_ = Vector::Zero(size());
  for (const auto& np : nodal_points_)
    if (np.node >= 0)
      for (int i = 0; i < components_; ++i) nodal_weights_[unknown(*this, i, np.node)] = np.weight;

  gram_ = assemble_gram(grid_, components_);
  auto factor = std::make_shared<Eigen::SimplicialLLT<SparseMatrix>>(gram_);
  if (factor->info() != Eigen::Success) throw InvariantError("gram matrix is not positive definite");
  gram_factor_ = std::move(factor);
}

Vector Discretization::gram_solve(const Vector& rhs) const {
  Vector x = gram_factor_->solve(rhs);
  if (gram_factor_->info() != Eigen::Success) throw InvariantError("gram solve failed");
  return x;
}

Matrix Discretization::gram_solve(const Matrix& rhs) const {
  Matrix x = gram_factor_->solve(rhs);
  if (gram_factor_->info() != Eigen::Success) throw InvariantError("gram solve failed");
  return x;
}

double Discretization::inner(const Vector& a, const Vector& b) const { return a.dot(gram_ * b); }

double Discretization::norm(const Vector& v) const { return std::sqrt(std::max(0.0, inner(v, v))); }

double Discretization::dual_norm(const Vector& load) const {
  return std::sqrt(std::max(0.0, load.dot(gram_solve(load))));
}

Vector Discretization::sample(const std::function<double(const Point&, int)>& field) const {
  Vector u = Vector::Zero(size());
  for (int i = 0; i < components_; ++i)
    for (int k = 0; k < grid_.interior_count(); ++k)
      u[unknown(*this, i, k)] = field(grid_.position(grid_.node_of(k)), i);
  return u;
}

SparseMatrix assemble_gram(const Grid& grid, int components) {
  // Same element layout as Discretization, with an identity top-order block.
  const int n = grid.dimension();
  const int interior = grid.interior_count();
  std::vector<Eigen::Triplet<double>> triplets;
  auto add_element = [&](const std::array<int, 3>& nodes, int nv, double w,
                         const std::array<std::array<double, 3>, 2>& dg) {
    for (int i = 0; i < components; ++i)
      for (int a = 0; a < nv; ++a) {
        if (nodes[a] < 0) continue;
        for (int b = 0; b < nv; ++b) {
          if (nodes[b] < 0) continue;
          double v = 0.0;
          for (int ax = 0; ax < n; ++ax) v += dg[ax][a] * dg[ax][b];
          triplets.emplace_back(i * interior + nodes[a], i * interior + nodes[b], w * v);
        }
      }
  };
  const double hx = grid.width(0);
  if (n == 1) {
    const std::array<std::array<double, 3>, 2> dg{{{-1.0 / hx, 1.0 / hx, 0.0}, {}}};
    for (int c = 0; c < grid.cells(0); ++c)
      add_element({grid.flat_index({c, 0}), grid.flat_index({c + 1, 0}), -1}, 2, hx, dg);
  } else {
    const double hy = grid.width(1);
    for (int j = 0; j < grid.cells(1); ++j)
      for (int i = 0; i < grid.cells(0); ++i) {
        for (double s : {1.0, -1.0}) {
          std::array<int, 3> nodes;
          if (s > 0)
            nodes = {grid.flat_index({i, j}), grid.flat_index({i + 1, j}),
                     grid.flat_index({i, j + 1})};
          else
            nodes = {grid.flat_index({i + 1, j + 1}), grid.flat_index({i, j + 1}),
                     grid.flat_index({i + 1, j})};
          const std::array<std::array<double, 3>, 2> dg{
              {{-s / hx, s / hx, 0.0}, {-s / hy, 0.0, s / hy}}};
          add_element(nodes, 3, 0.5 * hx * hy, dg);
        }
      }
  }
  SparseMatrix M(components * interior, components * interior);
  M.setFromTriplets(triplets.begin(), triplets.end());
  return M;
}

double energy(const Discretization& disc, const ProblemSpec& problem, const FieldVector& u,
              Which which) {
  check_conforming(disc, u);
  double total = 0.0;
  if (which == Which::F) {
    for (const auto& el : disc.elements())
      total += el.weight * eval_value(problem, which, el.x, element_slots(disc, el, u));
  } else {
    const int N = disc.components();
    Vector s(N);
    for (const auto& np : disc.nodal_points()) {
      for (int i = 0; i < N; ++i) s[i] = np.node < 0 ? 0.0 : u[unknown(disc, i, np.node)];
      total += np.weight * eval_value(problem, which, np.x, s);
    }
  }
  return total;
}

Vector assemble_load(const Discretization& disc, const ProblemSpec& problem, const FieldVector& u,
                     Which which) {
  check_conforming(disc, u);
  const int N = disc.components();
  const int n = disc.grid().dimension();
  Vector load = Vector::Zero(disc.size());
  if (which == Which::F) {
    for (const auto& el : disc.elements()) {
      const Vector g = eval_gradient(problem, which, el.x, element_slots(disc, el, u));
      for (int i = 0; i < N; ++i)
        for (int v = 0; v < el.vertex_count; ++v) {
          const int k = unknown(disc, i, el.nodes[v]);
          if (k < 0) continue;
          double d = g[i] / el.vertex_count;
          for (int a = 0; a < n; ++a) d += g[N + i * n + a] * el.dgrad[a][v];
          load[k] += el.weight * d;
        }
    }
  } else {
    Vector s(N);
    for (const auto& np : disc.nodal_points()) {
      if (np.node < 0) continue;
      for (int i = 0; i < N; ++i) s[i] = u[unknown(disc, i, np.node)];
      const Vector g = eval_gradient(problem, which, np.x, s);
      for (int i = 0; i < N; ++i) load[unknown(disc, i, np.node)] += np.weight * g[i];
    }
  }
  return load;
}

FieldVector assemble_gradient(const Discretization& disc, const ProblemSpec& problem,
                              const FieldVector& u, Which which) {
  return disc.gram_solve(assemble_load(disc, problem, u, which));
}

HessianParts assemble_hessian(const Discretization& disc, const ProblemSpec& problem,
                              const FieldVector& u, Which which) {
  check_conforming(disc, u);
  const int N = disc.components();
  const int size = disc.size();
  std::vector<Eigen::Triplet<double>> p_trip;
  std::vector<Eigen::Triplet<double>> q_trip;
  if (which == Which::F) {
    for (const auto& el : disc.elements()) {
      const Matrix H = eval_hessian(problem, which, el.x, element_slots(disc, el, u));
      const Matrix J = element_jacobian(disc, el);
      const int top = H.rows() - N;
      Matrix Hp = Matrix::Zero(H.rows(), H.cols());
      Hp.bottomRightCorner(top, top) = H.bottomRightCorner(top, top);
      const Matrix Hq = H - Hp;
      Matrix Lp = el.weight * J.transpose() * Hp * J;
      Matrix Lq = el.weight * J.transpose() * Hq * J;
      Lp = 0.5 * (Lp + Lp.transpose()).eval();
      Lq = 0.5 * (Lq + Lq.transpose()).eval();
      for (int a = 0; a < J.cols(); ++a) {
        const int ka = unknown(disc, a / el.vertex_count, el.nodes[a % el.vertex_count]);
        if (ka < 0) continue;
        for (int b = 0; b < J.cols(); ++b) {
          const int kb = unknown(disc, b / el.vertex_count, el.nodes[b % el.vertex_count]);
          if (kb < 0) continue;
          if (Lp(a, b) != 0.0) p_trip.emplace_back(ka, kb, Lp(a, b));
          if (Lq(a, b) != 0.0) q_trip.emplace_back(ka, kb, Lq(a, b));
        }
      }
    }
  } else {
    Vector s(N);
    for (const auto& np : disc.nodal_points()) {
      if (np.node < 0) continue;
      for (int i = 0; i < N; ++i) s[i] = u[unknown(disc, i, np.node)];
      const Matrix H = eval_hessian(problem, which, np.x, s);
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
          if (H(i, j) != 0.0)
            q_trip.emplace_back(unknown(disc, i, np.node), unknown(disc, j, np.node),
                                np.weight * H(i, j));
    }
  }
  HessianParts parts;
  parts.P_part.resize(size, size);
  parts.Q_part.resize(size, size);
  parts.P_part.setFromTriplets(p_trip.begin(), p_trip.end());
  parts.Q_part.setFromTriplets(q_trip.begin(), q_trip.end());
  parts.B = parts.P_part + parts.Q_part;
  return parts;
}

DiscreteOperatorSet assemble_operators(const Discretization& disc, const ProblemSpec& problem,
                                       const FieldVector& u) {
  HessianParts f = assemble_hessian(disc, problem, u, Which::F);
  HessianParts k = assemble_hessian(disc, problem, u, Which::K);
  DiscreteOperatorSet ops;
  ops.gram = disc.gram();
  ops.B1 = std::move(f.B);
  ops.P_part = std::move(f.P_part);
  ops.Q_part = std::move(f.Q_part);
  ops.B2 = std::move(k.B);
  return ops;
}

Coercivity check_coercivity(const Discretization& disc, const ProblemSpec& problem,
                            const FieldVector& u) {
  check_conforming(disc, u);
  const int N = disc.components();
  const int n = disc.grid().dimension();
  const int top = N * n;
  Coercivity result;
  result.margin = std::numeric_limits<double>::infinity();
  for (const auto& el : disc.elements()) {
    const Vector s = element_slots(disc, el, u);
    for (int i = 0; i < N; ++i) {
      const double g = s.segment(N + i * n, n).norm();
      result.max_gradient = std::max(result.max_gradient, g);
    }
    const Matrix H = eval_hessian(problem, Which::F, el.x, s);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H.bottomRightCorner(top, top),
                                              Eigen::EigenvaluesOnly);
    const double low = eig.eigenvalues().minCoeff();
    if (low < result.margin) {
      result.margin = low;
      result.worst_location = el.x;
    }
  }
  result.holds = result.margin > 0.0;
  if (problem.gradient_warning_threshold && result.max_gradient > *problem.gradient_warning_threshold) {
    std::ostringstream msg;
    msg << "max |Du| = " << result.max_gradient << " exceeds " << *problem.gradient_warning_threshold
        << "; ellipticity margin is degenerating";
    result.warnings.push_back(msg.str());
  }
  return result;
}

FieldVector base_state(const Discretization& disc, const ProblemSpec& problem) {
  if (!problem.base_state) return FieldVector::Zero(disc.size());
  return disc.sample(problem.base_state);
}

CallbackCheck check_callbacks(const ProblemSpec& problem, int probes, unsigned seed,
                              double probe_scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int n = problem.domain.dimension();
  CallbackCheck out;
  for (Which which : {Which::F, Which::K}) {
    const int m = problem.slot_count(which);
    for (int p = 0; p < probes; ++p) {
      Point x = Point::Zero();
      for (int a = 0; a < n; ++a)
        x[a] = problem.domain.lo[a] +
               0.5 * (unit(rng) + 1.0) * (problem.domain.hi[a] - problem.domain.lo[a]);
      Vector s(m);
      for (int k = 0; k < m; ++k) s[k] = probe_scale * unit(rng);
      const Vector g = eval_gradient(problem, which, x, s);
      Matrix H;
      try {
        H = integrand(problem, which).hessian(x, s);
      } catch (const std::exception& e) {
        throw IntegrandError(std::string("hessian callback failed: ") + e.what());
      }
      out.max_asymmetry = std::max(out.max_asymmetry, (H - H.transpose()).cwiseAbs().maxCoeff());
      for (int k = 0; k < m; ++k) {
        const double step = 1e-5 * std::max(1.0, std::abs(s[k]));
        Vector sp = s, sm = s;
        sp[k] += step;
        sm[k] -= step;
        const double fd = (eval_value(problem, which, x, sp) - eval_value(problem, which, x, sm)) /
                          (2.0 * step);
        const double gscale = std::max(1.0, g.cwiseAbs().maxCoeff());
        out.max_gradient_error = std::max(out.max_gradient_error, std::abs(fd - g[k]) / gscale);
        const Vector gfd = (eval_gradient(problem, which, x, sp) -
                            eval_gradient(problem, which, x, sm)) / (2.0 * step);
        const double hscale = std::max(1.0, H.cwiseAbs().maxCoeff());
        out.max_hessian_error =
            std::max(out.max_hessian_error, (gfd - H.col(k)).cwiseAbs().maxCoeff() / hscale);
      }
    }
  }
  out.passed = out.max_gradient_error < 1e-6 && out.max_hessian_error < 1e-6 &&
               out.max_asymmetry <= 1e-9;
  return out;
}

bool check_odd_symmetry(const ProblemSpec& problem, int probes, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int n = problem.domain.dimension();
  for (Which which : {Which::F, Which::K}) {
    const int m = problem.slot_count(which);
    for (int p = 0; p < probes; ++p) {
      Point x = Point::Zero();
      for (int a = 0; a < n; ++a)
        x[a] = problem.domain.lo[a] +
               0.5 * (unit(rng) + 1.0) * (problem.domain.hi[a] - problem.domain.lo[a]);
      Vector s(m);
      for (int k = 0; k < m; ++k) s[k] = unit(rng);
      const double a = eval_value(problem, which, x, s);
      const double b = eval_value(problem, which, x, -s);
      if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) return false;
    }
  }
  return true;
}

}  // namespace varbif
