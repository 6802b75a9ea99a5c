#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hb/interval.hpp"

using namespace hb;

namespace {

bool encloses(const Interval& v, long double x) {
  return (long double)v.lo <= x && x <= (long double)v.hi;
}

double rand_mag(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-12, 12);
  return std::ldexp(mant(rng), expo(rng));
}

Interval rand_iv(std::mt19937_64& rng) {
  const double a = rand_mag(rng), b = rand_mag(rng);
  return Interval::hull(a, b);
}

double rand_in(std::mt19937_64& rng, const Interval& v) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double x = v.lo + u(rng) * (v.hi - v.lo);
  return std::min(std::max(x, v.lo), v.hi);
}

}  // namespace

TEST_CASE("endpoint arithmetic examples") {
  const Interval s = Interval(1, 2) + Interval(3, 4);
  CHECK(s.lo <= 4.0);
  CHECK(s.hi >= 6.0);

  const Interval p = Interval(-1, 1) * Interval(-1, 1);
  CHECK(p.lo <= -1.0);
  CHECK(p.hi >= 1.0);

  const Interval q = Interval(1.0) / Interval(3.0);
  const long double third = 1.0L / 3.0L;
  CHECK(encloses(q, third));
  CHECK(q.hi - q.lo <= 2.0 * std::ldexp(1.0, -54));  // two ulps of 1/3
}

TEST_CASE("division by interval containing zero") {
  CHECK_THROWS_AS(Interval(1.0) / Interval(-1.0, 1.0), DivisionByZeroInterval);
  CHECK_THROWS_AS(Interval(1.0) / Interval(0.0), DivisionByZeroInterval);
}

TEST_CASE("sqrt, sincos, exp_unit point examples") {
  const Interval r = iv_sqrt(Interval(4.0));
  CHECK(r.contains(2.0));
  // widened at most one representable step each side
  CHECK(r.lo >= next_down(2.0));
  CHECK(r.hi <= next_up(2.0));

  auto [s, c] = iv_sincos(Interval(0.0));
  CHECK(s.contains(0.0));
  CHECK(c.contains(1.0));
  CHECK(s.hi - s.lo < 1e-15);
  CHECK(c.hi - c.lo < 1e-15);

  const double pi3 = 3.14159265358979323846 / 3.0;
  const CInterval e = iv_exp_unit(Interval(pi3));
  CHECK(encloses(e.re, std::cos((long double)pi3)));
  CHECK(encloses(e.im, std::sin((long double)pi3)));
  CHECK(e.re.contains(0.5));

  CHECK_THROWS_AS(iv_sqrt(Interval(-1.0, 1.0)), NegativeSqrt);
}

TEST_CASE("log examples") {
  CHECK(iv_log(Interval(1.0)).contains(0.0));
  const double e = std::exp(1.0);
  CHECK(encloses(iv_log(Interval(e)), std::log((long double)e)));
  CHECK(encloses(iv_log(Interval(2.0)), 0.69314718055994530942L));
  CHECK_THROWS_AS(iv_log(Interval(0.0, 1.0)), NonPositiveLog);
}

TEST_CASE("sincos over wide and critical intervals") {
  auto [s, c] = iv_sincos(Interval(-100.0, 100.0));
  CHECK(s.lo == -1.0);
  CHECK(s.hi == 1.0);
  CHECK(c.lo == -1.0);
  CHECK(c.hi == 1.0);

  // interval straddling pi/2: sin max must be 1
  auto [s2, c2] = iv_sincos(Interval(1.5, 1.7));
  CHECK(s2.hi == 1.0);
  CHECK(s2.lo <= std::sin(1.5));
  // interval straddling pi: cos min must be -1
  auto [s3, c3] = iv_sincos(Interval(3.0, 3.3));
  CHECK(c3.lo == -1.0);
}

TEST_CASE("randomized containment") {
  std::mt19937_64 rng(7);
  for (int it = 0; it < 20000; ++it) {
    const Interval a = rand_iv(rng), b = rand_iv(rng);
    const long double x = (long double)rand_in(rng, a);
    const long double y = (long double)rand_in(rng, b);
    CHECK(encloses(a + b, x + y));
    CHECK(encloses(a - b, x - y));
    CHECK(encloses(a * b, x * y));
    if (b.mig() > 0.0) CHECK(encloses(a / b, x / y));
    auto [s, c] = iv_sincos(a);
    CHECK(encloses(s, std::sin(x)));
    CHECK(encloses(c, std::cos(x)));
    if (a.lo >= 0.0) CHECK(encloses(iv_sqrt(a), std::sqrt(x)));
    if (a.lo > 0.0) CHECK(encloses(iv_log(a), std::log(x)));
  }
}

TEST_CASE("inclusion monotonicity") {
  std::mt19937_64 rng(13);
  auto widen = [&](const Interval& v) {
    std::uniform_real_distribution<double> u(0.0, 0.5);
    return Interval(v.lo - u(rng) * (1.0 + std::fabs(v.lo)),
                    v.hi + u(rng) * (1.0 + std::fabs(v.hi)));
  };
  for (int it = 0; it < 5000; ++it) {
    const Interval a = rand_iv(rng), b = rand_iv(rng);
    const Interval A = widen(a), B = widen(b);
    CHECK((A + B).contains(a + b));
    CHECK((A - B).contains(a - b));
    CHECK((A * B).contains(a * b));
    if (B.mig() > 0.0) CHECK((A / B).contains(a / b));
  }
}

TEST_CASE("complex interval arithmetic") {
  std::mt19937_64 rng(21);
  for (int it = 0; it < 5000; ++it) {
    const CInterval a(rand_iv(rng), rand_iv(rng));
    const CInterval b(rand_iv(rng), rand_iv(rng));
    const long double ar = (long double)rand_in(rng, a.re), ai = (long double)rand_in(rng, a.im);
    const long double br = (long double)rand_in(rng, b.re), bi = (long double)rand_in(rng, b.im);
    const CInterval p = a * b;
    CHECK(encloses(p.re, ar * br - ai * bi));
    CHECK(encloses(p.im, ar * bi + ai * br));
    if (cabs2(b).mig() > 1e-12) {
      const CInterval q = a / b;
      const long double d = br * br + bi * bi;
      CHECK(encloses(q.re, (ar * br + ai * bi) / d));
      CHECK(encloses(q.im, (ai * br - ar * bi) / d));
    }
  }
}

TEST_CASE("integer powers") {
  std::mt19937_64 rng(33);
  for (int it = 0; it < 2000; ++it) {
    const Interval a = rand_iv(rng);
    const long double x = (long double)rand_in(rng, a);
    for (unsigned n : {0u, 1u, 2u, 3u, 7u}) {
      long double p = 1.0L;
      for (unsigned i = 0; i < n; ++i) p *= x;
      CHECK(encloses(iv_pow(a, n), p));
    }
  }
}

TEST_CASE("hex float round trip is bit exact") {
  std::mt19937_64 rng(55);
  for (int it = 0; it < 1000; ++it) {
    double v = rand_mag(rng);
    CHECK(from_hex(to_hex(v)) == v);
  }
  CHECK(from_hex(to_hex(0.0)) == 0.0);
  CHECK(from_hex(to_hex(-0.0)) == 0.0);
  CHECK(from_hex(to_hex(0.1)) == 0.1);
  CHECK_THROWS(from_hex("zzz"));
}
