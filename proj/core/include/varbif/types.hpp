#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace varbif {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Point = Eigen::Vector2d;

/// Nodal field on the interior of a grid, component-major:
/// index = component * interior_count + flat_node.
using FieldVector = Vector;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
};

}  // namespace varbif
