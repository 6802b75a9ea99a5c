#pragma once
// Radii polynomials p_j(r) = Y_j + (Z1_j - 1) r + Z2_j r^2 + Z3_j r^3 with
// nonnegative coefficient bounds.  A verified r* > 0 with p_j(r*) < 0 for all
// j certifies a uniform contraction on the r*-ball.

#include <optional>
#include <vector>

#include "hb/interval.hpp"

namespace hb {

struct NoValidRadius : std::runtime_error {
  explicit NoValidRadius(const std::string& what) : std::runtime_error(what) {}
};

struct RadiiPoly {
  Interval y;   // constant term (residual bound)
  Interval z1;  // coefficient of r before the -1 shift (Z0+Z1)
  Interval z2;  // coefficient of r^2
  Interval z3;  // coefficient of r^3 (zero for quadratic polynomials)
};

struct RadiiReport {
  bool ok = false;
  double r = 0.0;
  double r_min = 0.0, r_max = 0.0;  // float estimates of the negativity range
  int worst_component = -1;         // most constraining j on failure
};

// Float root bracketing on the coefficient upper bounds, then interval
// verification at an interior candidate (geometric mean first, three more
// interior points on failure).
RadiiReport radii_check(const std::vector<RadiiPoly>& polys);

// Re-verification used by certificate checking: p_j(r) < 0 with intervals.
bool radii_reverify(const std::vector<RadiiPoly>& polys, double r);

}  // namespace hb
