#include <cmath>

#include "varbif_test/shooting.hpp"

namespace varbif::testing {

namespace {

void rk4(const SecondOrderRhs& f, double h, double& u, double& v) {
  const double k1u = v, k1v = f(u);
  const double k2u = v + 0.5 * h * k1v, k2v = f(u + 0.5 * h * k1u);
  const double k3u = v + 0.5 * h * k2v, k3v = f(u + 0.5 * h * k2u);
  const double k4u = v + h * k3v, k4v = f(u + h * k3u);
  u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
  v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
}

std::vector<double> trajectory(const SecondOrderRhs& rhs, double length, double slope, int cells, int sub) {
  const double h = length / (cells * sub);
  double u = 0.0, v = slope;
  std::vector<double> out{0.0};
  for (int c = 0; c < cells; ++c) {
    for (int s = 0; s < sub; ++s) rk4(rhs, h, u, v);
    out.push_back(u);
  }
  return out;
}

}  // namespace

double shoot_end(const SecondOrderRhs& rhs, double length, double slope, int steps) {
  const double h = length / steps;
  double u = 0.0, v = slope;
  for (int k = 0; k < steps; ++k) rk4(rhs, h, u, v);
  return u;
}

std::optional<ShootingResult> single_hump(const SecondOrderRhs& rhs, double length, double slope_max, int cells,
                                          int substeps, int scan) {
  const int steps = cells * substeps;
  double a = slope_max / scan;
  double fa = shoot_end(rhs, length, a, steps);
  for (int k = 2; k <= scan; ++k) {
    const double b = slope_max * k / scan;
    const double fb = shoot_end(rhs, length, b, steps);
    // Blow-up before x = L: larger slopes only make it worse.
    if (!std::isfinite(fb)) break;
    if (std::signbit(fa) != std::signbit(fb)) {
      double lo = a, hi = b, flo = fa;
      for (int it = 0; it < 200 && hi != lo; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = shoot_end(rhs, length, mid, steps);
        if (std::signbit(fm) == std::signbit(flo)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      ShootingResult r;
      r.slope = 0.5 * (lo + hi);
      r.mismatch = shoot_end(rhs, length, r.slope, steps);
      r.values = trajectory(rhs, length, r.slope, cells, substeps);
      return r;
    }
    a = b;
    fa = fb;
  }
  return std::nullopt;
}

}  // namespace varbif::testing
