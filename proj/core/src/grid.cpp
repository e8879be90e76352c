#include <cmath>
#include <sstream>

#include "varbif/assembly.hpp"
#include "varbif/errors.hpp"

namespace varbif {

Domain Domain::interval(double a, double b) {
  Domain d;
  d.kind = Kind::interval;
  d.lo = {a, 0.0};
  d.hi = {b, 0.0};
  return d;
}

Domain Domain::rectangle(double ax, double bx, double ay, double by) {
  Domain d;
  d.kind = Kind::rectangle;
  d.lo = {ax, ay};
  d.hi = {bx, by};
  return d;
}

double Domain::volume() const {
  double v = hi[0] - lo[0];
  if (kind == Kind::rectangle) v *= hi[1] - lo[1];
  return v;
}

Grid::Grid(const Domain& domain, std::array<int, 2> cells) : domain_(domain), cells_(cells) {
  const int n = domain.dimension();
  if (n == 1) cells_[1] = 1;
  for (int axis = 0; axis < n; ++axis) {
    if (!(domain.lo[axis] < domain.hi[axis]))
      throw ConfigError("domain bounds must satisfy a < b on every axis");
    if (cells_[axis] < 1) throw ConfigError("grid needs at least one cell per axis");
    width_[axis] = (domain.hi[axis] - domain.lo[axis]) / cells_[axis];
  }
  interior_count_ = cells_[0] - 1;
  if (n == 2) interior_count_ *= cells_[1] - 1;
}

double Grid::cell_volume() const {
  return dimension() == 1 ? width_[0] : width_[0] * width_[1];
}

bool Grid::on_boundary(const Node& node) const {
  if (node[0] <= 0 || node[0] >= cells_[0]) return true;
  if (dimension() == 2 && (node[1] <= 0 || node[1] >= cells_[1])) return true;
  return false;
}

int Grid::flat_index(const Node& node) const {
  if (on_boundary(node)) return -1;
  if (dimension() == 1) return node[0] - 1;
  return (node[1] - 1) * (cells_[0] - 1) + (node[0] - 1);
}

Grid::Node Grid::node_of(int flat) const {
  if (dimension() == 1) return {flat + 1, 0};
  const int nx = cells_[0] - 1;
  return {flat % nx + 1, flat / nx + 1};
}

Point Grid::position(const Node& node) const {
  Point p = Point::Zero();
  p[0] = domain_.lo[0] + node[0] * width_[0];
  if (dimension() == 2) p[1] = domain_.lo[1] + node[1] * width_[1];
  return p;
}

Grid build_grid(const Domain& domain, int resolution) {
  return build_grid(domain, {resolution, resolution});
}

Grid build_grid(const Domain& domain, std::array<int, 2> resolution) {
  for (int axis = 0; axis < domain.dimension(); ++axis) {
    if (resolution[axis] < 4) {
      std::ostringstream msg;
      msg << "resolution " << resolution[axis] << " on axis " << axis << " is below the minimum of 4";
      throw ConfigError(msg.str());
    }
  }
  return Grid(domain, resolution);
}

}  // namespace varbif
