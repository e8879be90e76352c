#pragma once

#include <functional>
#include <optional>
#include <vector>

namespace varbif::testing {

/// u'' = rhs(u) on (0, L) with u(0) = u(L) = 0, integrated by classical RK4.
using SecondOrderRhs = std::function<double(double u)>;

struct ShootingResult {
  double slope = 0.0;
  double mismatch = 0.0;
  /// u at the nodes x_k = k L / cells, k = 0..cells.
  std::vector<double> values;
};

/// u(L) for the initial slope u'(0) = s.
double shoot_end(const SecondOrderRhs& rhs, double length, double slope, int steps);

/// Scans slopes from 0 towards slope_max and bisects the first sign change of
/// u(L): the single-hump solution with the sign of slope_max.
std::optional<ShootingResult> single_hump(const SecondOrderRhs& rhs, double length, double slope_max,
                                          int cells, int substeps = 16, int scan = 400);

}  // namespace varbif::testing
