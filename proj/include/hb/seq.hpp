#pragma once
// Weighted l1 sequence spaces over two-index Taylor coefficients and
// Chebyshev coefficients: convolutions, norms, dual norms, operator norm
// bounds for block operators with diagonal tails, and the Q_k convolution
// estimates.  Everything is a pure function over immutable values.

#include <algorithm>
#include <complex>
#include <vector>

#include "hb/interval.hpp"
#include "hb/ivmat.hpp"

namespace hb {

// ---- two-index triangular layout -----------------------------------------
// Multi-indices alpha in N^2 with |alpha| < N, ordered by increasing degree
// |alpha| = a1+a2 and within a degree by increasing a2:
//   (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...

inline int tri_size(int N) { return N * (N + 1) / 2; }
inline int tri_index(int a1, int a2) {
  const int d = a1 + a2;
  return d * (d + 1) / 2 + a2;
}
struct Alpha {
  int a1 = 0, a2 = 0;
  int deg() const { return a1 + a2; }
};
inline Alpha tri_alpha(int idx) {
  int d = int((std::sqrt(8.0 * idx + 1.0) - 1.0) / 2.0);
  while (d * (d + 1) / 2 > idx) --d;
  while ((d + 1) * (d + 2) / 2 <= idx) ++d;
  const int a2 = idx - d * (d + 1) / 2;
  return Alpha{d - a2, a2};
}

// Dense triangular two-index sequence, entries for all |alpha| < N.
template <typename T>
struct Taylor2 {
  int N = 0;
  std::vector<T> c;

  Taylor2() = default;
  explicit Taylor2(int n) : N(n), c(size_t(tri_size(n)), T{}) {}

  T& at(int a1, int a2) { return c[size_t(tri_index(a1, a2))]; }
  const T& at(int a1, int a2) const { return c[size_t(tri_index(a1, a2))]; }
  // zero outside the stored triangle
  T get(int a1, int a2) const {
    return (a1 + a2 < N) ? c[size_t(tri_index(a1, a2))] : T{};
  }
};

// Cauchy product over N^2: (u * v)_alpha = sum_{0<=s<=alpha} u_s v_{alpha-s}.
// The result keeps every representable degree (N_u + N_v - 1).
template <typename T>
Taylor2<T> cauchy2(const Taylor2<T>& u, const Taylor2<T>& v) {
  Taylor2<T> w(u.N + v.N - 1);
  for (int i = 0; i < tri_size(u.N); ++i) {
    const Alpha s = tri_alpha(i);
    for (int j = 0; j < tri_size(v.N); ++j) {
      const Alpha t = tri_alpha(j);
      w.at(s.a1 + t.a1, s.a2 + t.a2) += u.c[size_t(i)] * v.c[size_t(j)];
    }
  }
  return w;
}

// ---- abs helpers -----------------------------------------------------------

inline Interval abs_iv(const Interval& v) { return iv_abs(v); }
inline Interval abs_iv(const CInterval& v) { return iv_sqrt(cabs2(v)); }
inline Interval abs_iv(double v) { return Interval(std::fabs(v)); }
inline Interval abs_iv(const std::complex<double>& v) {
  return iv_sqrt(cabs2(CInterval(Interval(v.real()), Interval(v.imag()))));
}

// ---- Taylor norm -----------------------------------------------------------

// ||u||_{1,nu} = sum_alpha |u_alpha| nu^{|alpha|}  (enclosure)
template <typename T>
Interval norm_l1nu_taylor(const Taylor2<T>& u, const Interval& nu) {
  std::vector<Interval> pw(size_t(u.N), Interval(1.0));
  for (int d = 1; d < u.N; ++d) pw[size_t(d)] = pw[size_t(d - 1)] * nu;
  Interval s(0.0);
  for (int i = 0; i < tri_size(u.N); ++i) {
    s += abs_iv(u.c[size_t(i)]) * pw[size_t(tri_alpha(i).deg())];
  }
  return s;
}

// ---- Chebyshev sequences ---------------------------------------------------

// ||a||_{1,nu} = |a_0| + 2 sum_{k>=1} |a_k| nu^k
template <typename T>
Interval norm_l1nu_cheb(const std::vector<T>& a, const Interval& nu) {
  if (a.empty()) return Interval(0.0);
  Interval s = abs_iv(a[0]);
  Interval pw(1.0);
  for (size_t k = 1; k < a.size(); ++k) {
    pw = pw * nu;
    s += 2.0 * abs_iv(a[k]) * pw;
  }
  return s;
}

// dual norm ||c||_{inf,nu^-1} = max(|c_0|, 1/2 sup_{k>=1} |c_k| nu^{-k})
template <typename T>
Interval norm_dual_cheb(const std::vector<T>& c, const Interval& nu) {
  if (c.empty()) return Interval(0.0);
  Interval s = abs_iv(c[0]);
  Interval ipw(1.0);
  for (size_t k = 1; k < c.size(); ++k) {
    ipw = ipw / nu;
    s = iv_max(s, 0.5 * abs_iv(c[k]) * ipw);
  }
  return s;
}

// signed-index discrete convolution (a*b)_k = sum_{k1+k2=k} a_{|k1|} b_{|k2|}
template <typename T>
std::vector<T> conv1(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty() || b.empty()) return {};
  const int la = int(a.size()), lb = int(b.size());
  std::vector<T> w(size_t(la + lb - 1), T{});
  for (int k = 0; k < la + lb - 1; ++k) {
    T acc{};
    const int k1lo = std::max(-(la - 1), k - (lb - 1));
    const int k1hi = std::min(la - 1, k + (lb - 1));
    for (int k1 = k1lo; k1 <= k1hi; ++k1) {
      acc += a[size_t(std::abs(k1))] * b[size_t(std::abs(k - k1))];
    }
    w[size_t(k)] = acc;
  }
  return w;
}

// Chebyshev weights w_0 = 1, w_k = 2 nu^k
struct WeightVector {
  std::vector<Interval> w;
  explicit WeightVector(int n, const Interval& nu) : w(size_t(n)) {
    Interval pw(1.0);
    w[0] = Interval(1.0);
    for (int k = 1; k < n; ++k) {
      pw = pw * nu;
      w[size_t(k)] = 2.0 * pw;
    }
  }
};

// ---- operator norms --------------------------------------------------------

// Operator norm on the two-index l^1_nu space of a finite block over the
// triangular index set plus a diagonal tail with sup bound tail_sup:
//   max( max_{|a|<N} nu^{-|a|} sum_{|a'|<N} |G_{a',a}| nu^{|a'|},  tail_sup )
Interval opnorm_block_taylor(const IvMat& G, int N, const Interval& tail_sup,
                             const Interval& nu);

// Operator norm on the Chebyshev l^1_nu space (weights 1, 2nu^k) of an m x m
// block; when diag_tail is set the operator continues as 1/(2k) for k >= m
// whose column sups are dominated by 1/(2m).
Interval opnorm_block_cheb(const IvMat& G, const Interval& nu, bool diag_tail);

// ---- Q_k convolution estimates ---------------------------------------------

// Q_k(a)    = max(|a_k|, sup_{k'>=1} (|a_{|k-k'|}| + |a_{k+k'}|) / (2 nu^k'))
// Qhat_k(a) = sup_{k'>=m} (|a_{|k-k'|}| + |a_{k+k'}|) / (2 nu^k')
// For finitely supported a both sups are attained with k' <= k + len(a); the
// quotient vanishes beyond because both numerator entries are outside the
// support.  The sup over an empty range is 0.
struct QkPair {
  Interval q;
  Interval qhat;
};
QkPair qk_estimates(const std::vector<Interval>& a, int k, const Interval& nu, int m);

}  // namespace hb
