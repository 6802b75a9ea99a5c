#include "hb/radii.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hb {

namespace {

// p(r) with upper-bound (double) coefficients; convex on r > 0
double peval(const RadiiPoly& p, double r) {
  return p.y.hi + (p.z1.hi - 1.0) * r + p.z2.hi * r * r + p.z3.hi * r * r * r;
}

// negativity range (r1, r2) of one component using its coefficient sups;
// empty range signalled by r1 >= r2
std::pair<double, double> neg_range(const RadiiPoly& p) {
  const double y = p.y.hi, a = p.z1.hi - 1.0, b = p.z2.hi, c = p.z3.hi;
  const double inf = std::numeric_limits<double>::infinity();
  if (a >= 0.0) {
    // all coefficients nonnegative: never negative (p(0) = y >= 0)
    return {inf, -inf};
  }
  // p is convex for r > 0, so {p < 0} is a single open interval; locate the
  // minimizer and bisect outward on both sides.
  double rstar;
  if (c > 0.0) {
    rstar = (-2.0 * b + std::sqrt(4.0 * b * b - 12.0 * c * a)) / (6.0 * c);
  } else if (b > 0.0) {
    rstar = -a / (2.0 * b);
  } else {
    // linear with negative slope: negative beyond y / (-a)
    return {y / (-a), inf};
  }
  if (!(rstar > 0.0) || peval(p, rstar) >= 0.0) return {inf, -inf};

  double lo = 0.0, hi = rstar;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (peval(p, mid) < 0.0 ? hi : lo) = mid;
  }
  const double r1 = hi;

  double lo2 = rstar, hi2 = rstar;
  while (peval(p, hi2) < 0.0 && hi2 < 1e30) hi2 *= 2.0;
  if (hi2 >= 1e30) return {r1, inf};
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo2 + hi2);
    (peval(p, mid) < 0.0 ? lo2 : hi2) = mid;
  }
  return {r1, lo2};
}

bool verify_at(const std::vector<RadiiPoly>& polys, double r, int* worst) {
  const Interval riv(r);
  for (size_t j = 0; j < polys.size(); ++j) {
    const RadiiPoly& p = polys[j];
    const Interval v = p.y + (p.z1 - 1.0) * riv + p.z2 * riv * riv + p.z3 * riv * riv * riv;
    if (!(v.hi < 0.0)) {
      if (worst) *worst = int(j);
      return false;
    }
  }
  return true;
}

}  // namespace

RadiiReport radii_check(const std::vector<RadiiPoly>& polys) {
  RadiiReport rep;
  double rmin = 0.0, rmax = std::numeric_limits<double>::infinity();
  int limiting = -1;
  for (size_t j = 0; j < polys.size(); ++j) {
    const auto [r1, r2] = neg_range(polys[j]);
    if (r1 > rmin) { rmin = r1; limiting = int(j); }
    rmax = std::min(rmax, r2);
  }
  rep.r_min = rmin;
  rep.r_max = rmax;
  if (!(rmin < rmax)) {
    rep.worst_component = limiting;
    return rep;
  }

  const double lo = std::max(rmin, 1e-300);
  const double hi = std::min(rmax, 1e6);
  const double llo = std::log(lo), lhi = std::log(hi);
  const double ts[4] = {0.5, 0.25, 0.75, 0.9};
  for (double t : ts) {
    const double cand = std::exp(llo * (1.0 - t) + lhi * t);
    int worst = -1;
    if (cand > rmin && cand < rmax && verify_at(polys, cand, &worst)) {
      rep.ok = true;
      rep.r = cand;
      return rep;
    }
    if (worst >= 0) rep.worst_component = worst;
  }
  return rep;
}

bool radii_reverify(const std::vector<RadiiPoly>& polys, double r) {
  return r > 0.0 && verify_at(polys, r, nullptr);
}

}  // namespace hb
