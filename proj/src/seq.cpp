#include "hb/seq.hpp"

namespace hb {

Interval opnorm_block_taylor(const IvMat& G, int N, const Interval& tail_sup,
                             const Interval& nu) {
  const int T = tri_size(N);
  std::vector<Interval> pw(size_t(N), Interval(1.0));
  for (int d = 1; d < N; ++d) pw[size_t(d)] = pw[size_t(d - 1)] * nu;

  Interval best(0.0);
  for (int col = 0; col < T; ++col) {
    Interval s(0.0);
    for (int row = 0; row < T; ++row) {
      s += abs_iv(G(row, col)) * pw[size_t(tri_alpha(row).deg())];
    }
    best = iv_max(best, s / pw[size_t(tri_alpha(col).deg())]);
  }
  return iv_max(best, tail_sup);
}

Interval opnorm_block_cheb(const IvMat& G, const Interval& nu, bool diag_tail) {
  const int m = G.cols;
  WeightVector wv(std::max(G.rows, m), nu);
  Interval best(0.0);
  for (int col = 0; col < m; ++col) {
    Interval s(0.0);
    for (int row = 0; row < G.rows; ++row) {
      s += abs_iv(G(row, col)) * wv.w[size_t(row)];
    }
    best = iv_max(best, s / wv.w[size_t(col)]);
  }
  if (diag_tail && m >= 1) {
    // tail entries 1/(2k), k >= m, under weights w_k cancel to 1/(2k) <= 1/(2m)
    best = iv_max(best, Interval(1.0) / Interval(2.0 * m));
  }
  return best;
}

QkPair qk_estimates(const std::vector<Interval>& a, int k, const Interval& nu, int m) {
  const int len = int(a.size());
  auto entry = [&](int i) -> Interval {
    return (i < len) ? iv_abs(a[size_t(i)]) : Interval(0.0);
  };
  QkPair out{Interval(0.0), Interval(0.0)};
  out.q = entry(k);
  Interval pw(1.0);
  const int kmax = k + len + 1;
  for (int kp = 1; kp <= kmax; ++kp) {
    pw = pw * nu;
    const Interval num = entry(std::abs(k - kp)) + entry(k + kp);
    const Interval quot = num / (2.0 * pw);
    out.q = iv_max(out.q, quot);
    if (kp >= m) out.qhat = iv_max(out.qhat, quot);
  }
  return out;
}

}  // namespace hb
