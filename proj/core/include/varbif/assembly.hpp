#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "varbif/types.hpp"

namespace varbif {

struct Domain {
  enum class Kind { interval, rectangle };

  Kind kind = Kind::interval;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 0.0};

  static Domain interval(double a, double b);
  static Domain rectangle(double ax, double bx, double ay, double by);

  int dimension() const { return kind == Kind::interval ? 1 : 2; }
  double volume() const;
};

/// Uniform tensor grid with homogeneous Dirichlet data; only interior nodes
/// carry unknowns. Node multi-indices run over 0..cells(axis) per axis.
class Grid {
 public:
  using Node = std::array<int, 2>;

  Grid(const Domain& domain, std::array<int, 2> cells);

  const Domain& domain() const { return domain_; }
  int dimension() const { return domain_.dimension(); }
  int cells(int axis) const { return cells_[axis]; }
  double width(int axis) const { return width_[axis]; }
  double cell_volume() const;

  int interior_count() const { return interior_count_; }
  /// Flat interior index of a node, or -1 for boundary nodes.
  int flat_index(const Node& node) const;
  Node node_of(int flat) const;
  Point position(const Node& node) const;
  bool on_boundary(const Node& node) const;

 private:
  Domain domain_;
  std::array<int, 2> cells_{1, 1};
  std::array<double, 2> width_{1.0, 1.0};
  int interior_count_ = 0;
};

/// Throws ConfigError below 4 cells per axis.
Grid build_grid(const Domain& domain, int resolution);
Grid build_grid(const Domain& domain, std::array<int, 2> resolution);

/// Integrand with analytic derivative callbacks. For F the slot vector is
/// [xi0 (N), xi1 (N*n)] with xi1 laid out as component * n + axis; for K it is
/// xi0 only.
struct Integrand {
  std::function<double(const Point&, const Vector&)> value;
  std::function<Vector(const Point&, const Vector&)> gradient;
  std::function<Matrix(const Point&, const Vector&)> hessian;
};

enum class Symmetry { none, odd };
enum class Which { F, K };

struct ProblemSpec {
  std::string name;
  Domain domain;
  int components = 1;
  int order = 1;
  Integrand F;
  Integrand K;
  /// Empty means the zero state.
  std::function<double(const Point&, int)> base_state;
  Symmetry symmetry = Symmetry::none;
  std::optional<double> coercivity_constant;
  /// Coercivity checks warn when some |Du| exceeds this value.
  std::optional<double> gradient_warning_threshold;

  int slot_count(Which which) const {
    return which == Which::F ? components * (1 + domain.dimension()) : components;
  }
};

/// Throws ConfigError when the problem is not representable (m != 1, N < 1,
/// missing callbacks, domain with a >= b).
void validate_problem(const ProblemSpec& problem);

struct CallbackCheck {
  double max_gradient_error = 0.0;
  double max_hessian_error = 0.0;
  double max_asymmetry = 0.0;
  bool passed = false;
};

/// Finite-difference self-check of the derivative callbacks on random slot
/// probes of magnitude <= probe_scale.
CallbackCheck check_callbacks(const ProblemSpec& problem, int probes, unsigned seed,
                              double probe_scale = 0.5);

/// Samples F(x,-xi) == F(x,xi) and K(x,-xi) == K(x,xi).
bool check_odd_symmetry(const ProblemSpec& problem, int probes, unsigned seed);

struct DiscreteOperatorSet {
  SparseMatrix gram;
  SparseMatrix B1;
  SparseMatrix B2;
  SparseMatrix P_part;
  SparseMatrix Q_part;
};

struct HessianParts {
  SparseMatrix B;
  SparseMatrix P_part;
  SparseMatrix Q_part;
};

struct Coercivity {
  bool holds = false;
  double margin = 0.0;
  Point worst_location = Point::Zero();
  double max_gradient = 0.0;
  std::vector<std::string> warnings;
};

/// Element data shared by every integrand evaluated on one grid: quadrature
/// points, weights and the linear maps from local nodal values to slots, plus
/// the gram matrix and its factorization.
class Discretization {
 public:
  Discretization(Grid grid, int components);

  const Grid& grid() const { return grid_; }
  int components() const { return components_; }
  int size() const { return components_ * grid_.interior_count(); }

  const SparseMatrix& gram() const { return gram_; }
  /// Solves M_H x = rhs.
  Vector gram_solve(const Vector& rhs) const;
  Matrix gram_solve(const Matrix& rhs) const;
  double inner(const Vector& a, const Vector& b) const;
  double norm(const Vector& v) const;
  /// Gram norm of the Riesz representer of a load (dual) vector.
  double dual_norm(const Vector& load) const;
  /// Lumped nodal quadrature weights per unknown (the K mass diagonal).
  const Vector& nodal_weights() const { return nodal_weights_; }

  Vector sample(const std::function<double(const Point&, int)>& field) const;

  struct Element {
    std::array<int, 3> nodes{-1, -1, -1};
    int vertex_count = 0;
    Point x = Point::Zero();
    double weight = 0.0;
    /// d(xi1_axis)/d(u_vertex)
    std::array<std::array<double, 3>, 2> dgrad{};
  };
  const std::vector<Element>& elements() const { return elements_; }

  struct NodalPoint {
    int node = -1;  // -1 for boundary nodes
    Point x = Point::Zero();
    double weight = 0.0;
  };
  const std::vector<NodalPoint>& nodal_points() const { return nodal_points_; }

 private:
  Grid grid_;
  int components_ = 1;
  std::vector<Element> elements_;
  std::vector<NodalPoint> nodal_points_;
  Vector nodal_weights_;
  SparseMatrix gram_;
  std::shared_ptr<const Eigen::SimplicialLLT<SparseMatrix>> gram_factor_;
};

/// Discrete top-order inner product sum_i int Du^i . Dv^i.
SparseMatrix assemble_gram(const Grid& grid, int components);

double energy(const Discretization& disc, const ProblemSpec& problem, const FieldVector& u,
              Which which);
/// d(energy)/du, the load vector.
Vector assemble_load(const Discretization& disc, const ProblemSpec& problem, const FieldVector& u,
                     Which which);
/// Gradient in the gram geometry: M_H g = load.
FieldVector assemble_gradient(const Discretization& disc, const ProblemSpec& problem,
                              const FieldVector& u, Which which);
HessianParts assemble_hessian(const Discretization& disc, const ProblemSpec& problem,
                              const FieldVector& u, Which which);
DiscreteOperatorSet assemble_operators(const Discretization& disc, const ProblemSpec& problem,
                                       const FieldVector& u);
Coercivity check_coercivity(const Discretization& disc, const ProblemSpec& problem,
                            const FieldVector& u);

FieldVector base_state(const Discretization& disc, const ProblemSpec& problem);

}  // namespace varbif
