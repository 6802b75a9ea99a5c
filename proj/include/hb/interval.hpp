#pragma once
// Rigorous real and complex interval arithmetic with outward rounding.
//
// Every operation first evaluates in round-to-nearest and then widens the
// result by one representable float per rounding incurred, so containment of
// the exact result holds without touching the FPU rounding mode.  All values
// are immutable and all functions are pure, so concurrent use is safe.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace hb {

struct DivisionByZeroInterval : std::runtime_error {
  DivisionByZeroInterval() : std::runtime_error("interval division by interval containing zero") {}
};
struct NegativeSqrt : std::runtime_error {
  NegativeSqrt() : std::runtime_error("interval sqrt of interval with negative lower bound") {}
};
struct NonPositiveLog : std::runtime_error {
  NonPositiveLog() : std::runtime_error("interval log of interval with non-positive lower bound") {}
};

inline double next_up(double x) {
  return std::nextafter(x, std::numeric_limits<double>::infinity());
}
inline double next_down(double x) {
  return std::nextafter(x, -std::numeric_limits<double>::infinity());
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  explicit Interval(double v) : lo(v), hi(v) {}
  Interval(double l, double h) : lo(l), hi(h) {}

  static Interval hull(double a, double b) {
    return a <= b ? Interval(a, b) : Interval(b, a);
  }
  static Interval hull(const Interval& a, const Interval& b) {
    return Interval(std::min(a.lo, b.lo), std::max(a.hi, b.hi));
  }

  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }

  double mid() const { return 0.5 * (lo + hi); }
  // sup of |x| over the interval
  double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }
  // inf of |x| over the interval (0 if the interval straddles 0)
  double mig() const {
    if (lo > 0.0) return lo;
    if (hi < 0.0) return -hi;
    return 0.0;
  }
  // upper bound on hi - lo
  double width() const { return next_up(hi - lo); }
  // upper bound on the radius around mid()
  double rad() const { return next_up(next_up(hi - lo) * 0.5); }

  bool is_finite() const { return std::isfinite(lo) && std::isfinite(hi); }
};

inline Interval operator-(const Interval& a) { return Interval(-a.hi, -a.lo); }

inline bool is_zero(const Interval& a) { return a.lo == 0.0 && a.hi == 0.0; }

// Sums with a zero addend are exact in IEEE arithmetic and skip the
// widening; this keeps endpoints that are zero by construction exactly zero.
inline double add_down(double x, double y) {
  const double s = x + y;
  return (x == 0.0 || y == 0.0) ? s : next_down(s);
}
inline double add_up(double x, double y) {
  const double s = x + y;
  return (x == 0.0 || y == 0.0) ? s : next_up(s);
}

inline Interval operator+(const Interval& a, const Interval& b) {
  return Interval(add_down(a.lo, b.lo), add_up(a.hi, b.hi));
}
inline Interval operator-(const Interval& a, const Interval& b) {
  return Interval(add_down(a.lo, -b.hi), add_up(a.hi, -b.lo));
}
inline Interval operator*(const Interval& a, const Interval& b) {
  if (is_zero(a) || is_zero(b)) return Interval(0.0);
  const double p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  const double lo = std::min(std::min(p1, p2), std::min(p3, p4));
  const double hi = std::max(std::max(p1, p2), std::max(p3, p4));
  return Interval(next_down(lo), next_up(hi));
}
inline Interval operator/(const Interval& a, const Interval& b) {
  if (b.lo <= 0.0 && b.hi >= 0.0) throw DivisionByZeroInterval();
  if (is_zero(a)) return Interval(0.0);
  const double q1 = a.lo / b.lo, q2 = a.lo / b.hi, q3 = a.hi / b.lo, q4 = a.hi / b.hi;
  const double lo = std::min(std::min(q1, q2), std::min(q3, q4));
  const double hi = std::max(std::max(q1, q2), std::max(q3, q4));
  return Interval(next_down(lo), next_up(hi));
}

inline Interval operator+(const Interval& a, double b) { return a + Interval(b); }
inline Interval operator+(double a, const Interval& b) { return Interval(a) + b; }
inline Interval operator-(const Interval& a, double b) { return a - Interval(b); }
inline Interval operator-(double a, const Interval& b) { return Interval(a) - b; }
inline Interval operator*(const Interval& a, double b) { return a * Interval(b); }
inline Interval operator*(double a, const Interval& b) { return Interval(a) * b; }
inline Interval operator/(const Interval& a, double b) { return a / Interval(b); }
inline Interval operator/(double a, const Interval& b) { return Interval(a) / b; }

inline Interval& operator+=(Interval& a, const Interval& b) { a = a + b; return a; }
inline Interval& operator-=(Interval& a, const Interval& b) { a = a - b; return a; }
inline Interval& operator*=(Interval& a, const Interval& b) { a = a * b; return a; }

// |x| as an interval
inline Interval iv_abs(const Interval& a) {
  return Interval(a.mig(), a.mag());
}
inline Interval iv_max(const Interval& a, const Interval& b) {
  return Interval(std::max(a.lo, b.lo), std::max(a.hi, b.hi));
}

Interval iv_sqrt(const Interval& a);
Interval iv_log(const Interval& a);
// (sin, cos) enclosures; intervals wider than a full period give [-1,1]
std::pair<Interval, Interval> iv_sincos(const Interval& a);

// x^n by binary powering, n >= 0
Interval iv_pow(const Interval& a, unsigned n);

// certified enclosure of pi
const Interval& iv_pi();

struct CInterval {
  Interval re, im;

  CInterval() = default;
  explicit CInterval(double r) : re(r), im(0.0) {}
  CInterval(double r, double i) : re(r), im(i) {}
  CInterval(const Interval& r, const Interval& i) : re(r), im(i) {}

  CInterval conj() const { return CInterval(re, -im); }
  bool contains(double r, double i) const { return re.contains(r) && im.contains(i); }
  bool is_finite() const { return re.is_finite() && im.is_finite(); }
};

inline CInterval operator-(const CInterval& a) { return CInterval(-a.re, -a.im); }
inline CInterval operator+(const CInterval& a, const CInterval& b) {
  return CInterval(a.re + b.re, a.im + b.im);
}
inline CInterval operator-(const CInterval& a, const CInterval& b) {
  return CInterval(a.re - b.re, a.im - b.im);
}
inline CInterval operator*(const CInterval& a, const CInterval& b) {
  return CInterval(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
}
inline CInterval operator*(const Interval& a, const CInterval& b) {
  return CInterval(a * b.re, a * b.im);
}
inline CInterval operator*(const CInterval& a, const Interval& b) { return b * a; }
inline CInterval operator*(double a, const CInterval& b) { return Interval(a) * b; }
inline CInterval& operator+=(CInterval& a, const CInterval& b) { a = a + b; return a; }
inline CInterval& operator-=(CInterval& a, const CInterval& b) { a = a - b; return a; }

// |z|^2 enclosure (squares of straddling intervals start at zero)
inline Interval cabs2(const CInterval& z) { return iv_pow(z.re, 2) + iv_pow(z.im, 2); }
// upper bound on |z| over the rectangle
inline double cmag(const CInterval& z) { return iv_sqrt(cabs2(z)).hi; }
// 1/z; requires 0 outside the |z|^2 enclosure
inline CInterval cinv(const CInterval& z) {
  const Interval d = cabs2(z);
  return CInterval(z.re / d, -z.im / d);
}
inline CInterval operator/(const CInterval& a, const CInterval& b) { return a * cinv(b); }

// enclosure of e^{i psi}
CInterval iv_exp_unit(const Interval& psi);

// Bit-exact hexadecimal float serialization ("%a" format).
std::string to_hex(double v);
double from_hex(const std::string& s);

}  // namespace hb
