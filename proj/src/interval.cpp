#include "hb/interval.hpp"

#include <cstdio>
#include <cstdlib>

namespace hb {

namespace {

// Two-ulp widening around a point evaluation of a libm function.  glibc's
// sin/cos/log are faithful to well under 1 ulp; two steps leave margin.
inline Interval libm_point(double v) {
  return Interval(next_down(next_down(v)), next_up(next_up(v)));
}

// pi is irrational, so the nearest double is a strict lower bound here
// (3.14159265358979311... < pi); one step up gives a strict upper bound.
const double kPiLo = 3.141592653589793238462643383279502884;
const Interval kPi(kPiLo, next_up(kPiLo));
const Interval kTwoPi = kPi * 2.0;          // doubling is exact
const Interval kHalfPi(kPi.lo * 0.5, kPi.hi * 0.5);  // halving is exact

// Does [a,b] possibly contain a point congruent to c (mod 2*pi)?
// Conservative: may answer true when the true answer is false.
bool contains_mod_2pi(double a, double b, const Interval& c) {
  const double k0 = std::floor((a - c.hi) / (2.0 * kPiLo)) - 1.0;
  const double k1 = std::ceil((b - c.lo) / (2.0 * kPiLo)) + 1.0;
  for (double k = k0; k <= k1; k += 1.0) {
    const Interval cand = c + Interval(k) * kTwoPi;
    if (cand.hi >= a && cand.lo <= b) return true;
  }
  return false;
}

}  // namespace

const Interval& iv_pi() { return kPi; }

Interval iv_sqrt(const Interval& a) {
  if (a.lo < 0.0) throw NegativeSqrt();
  // IEEE sqrt is correctly rounded: one ulp each side suffices.
  return Interval(std::max(0.0, next_down(std::sqrt(a.lo))), next_up(std::sqrt(a.hi)));
}

Interval iv_log(const Interval& a) {
  if (a.lo <= 0.0) throw NonPositiveLog();
  return Interval(next_down(next_down(std::log(a.lo))), next_up(next_up(std::log(a.hi))));
}

std::pair<Interval, Interval> iv_sincos(const Interval& a) {
  const Interval full(-1.0, 1.0);
  if (!a.is_finite() || next_up(a.hi - a.lo) >= kTwoPi.lo) return {full, full};

  const Interval sa = libm_point(std::sin(a.lo)), sb = libm_point(std::sin(a.hi));
  const Interval ca = libm_point(std::cos(a.lo)), cb = libm_point(std::cos(a.hi));

  Interval s(std::min(sa.lo, sb.lo), std::max(sa.hi, sb.hi));
  Interval c(std::min(ca.lo, cb.lo), std::max(ca.hi, cb.hi));

  if (contains_mod_2pi(a.lo, a.hi, kHalfPi)) s.hi = 1.0;   // sin max
  if (contains_mod_2pi(a.lo, a.hi, -kHalfPi)) s.lo = -1.0; // sin min
  if (contains_mod_2pi(a.lo, a.hi, Interval(0.0))) c.hi = 1.0;  // cos max
  if (contains_mod_2pi(a.lo, a.hi, kPi)) c.lo = -1.0;           // cos min

  s.lo = std::max(s.lo, -1.0); s.hi = std::min(s.hi, 1.0);
  c.lo = std::max(c.lo, -1.0); c.hi = std::min(c.hi, 1.0);
  return {s, c};
}

Interval iv_pow(const Interval& a, unsigned n) {
  if (n == 0) return Interval(1.0);
  if (n % 2 == 0) {
    // even powers are nonnegative; work with |a| and clamp at zero
    Interval m(a.mig(), a.mag());
    Interval r(1.0);
    for (unsigned i = 0; i < n; ++i) r = r * m;
    return Interval(std::max(0.0, r.lo), r.hi);
  }
  Interval r(1.0), base = a;
  unsigned e = n;
  while (e > 0) {
    if (e & 1u) r = r * base;
    e >>= 1u;
    if (e > 0) base = base * base;
  }
  return r;
}

CInterval iv_exp_unit(const Interval& psi) {
  auto [s, c] = iv_sincos(psi);
  return CInterval(c, s);
}

std::string to_hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return std::string(buf);
}

double from_hex(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw std::runtime_error("bad hex float: '" + s + "'");
  }
  return v;
}

}  // namespace hb
