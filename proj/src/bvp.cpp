#include "hb/bvp.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>

namespace hb {

namespace {

using IVec = std::vector<Interval>;

IVec to_ivec(const std::vector<double>& v) {
  IVec r;
  r.reserve(v.size());
  for (double x : v) r.emplace_back(x);
  return r;
}

IVec delta_ivec(const std::vector<double>& a1, const std::vector<double>& a0) {
  IVec r(a0.size());
  for (size_t k = 0; k < a0.size(); ++k) r[k] = Interval(a1[k]) - Interval(a0[k]);
  return r;
}

Interval at(const IVec& v, int k) {
  return (k >= 0 && k < int(v.size())) ? v[size_t(k)] : Interval(0.0);
}
double at(const std::vector<double>& v, int k) {
  return (k >= 0 && k < int(v.size())) ? v[size_t(k)] : 0.0;
}
// the k+-1 index shift y_{k+1} - y_{k-1}, k >= 1
Interval pm(const IVec& v, int k) { return at(v, k + 1) - at(v, k - 1); }
double pm(const std::vector<double>& v, int k) { return at(v, k + 1) - at(v, k - 1); }

// block offsets in R^{4m+2}: (L, psi, x1, x2, x3, x4) and the matching rows
int off(int j, int m) { return j <= 2 ? j - 1 : 2 + (j - 3) * m; }

std::array<double, 4> rhs_psi(double beta, const std::array<double, 4>& v) {
  return {v[1] + v[0] * v[1], v[2], v[3], -beta * v[2] - v[0]};
}

// Clenshaw for sum_{k=0}^{n-1} a_k T_k(t) with plain coefficients
double clenshaw(const std::vector<double>& a, double t) {
  double b1 = 0.0, b2 = 0.0;
  for (int k = int(a.size()) - 1; k >= 1; --k) {
    const double b0 = 2.0 * t * b1 - b2 + a[size_t(k)];
    b2 = b1;
    b1 = b0;
  }
  return a.empty() ? 0.0 : a[0] + t * b1 - b2;
}

std::vector<double> plain_coeffs(const std::vector<double>& x) {
  std::vector<double> a(x.size());
  if (!x.empty()) a[0] = x[0];
  for (size_t k = 1; k < x.size(); ++k) a[k] = 2.0 * x[k];
  return a;
}

// derivative coefficients in the plain basis: b_{k-1} = b_{k+1} + 2k a_k
std::vector<double> derivative_coeffs(const std::vector<double>& a) {
  const int n = int(a.size());
  std::vector<double> b(size_t(n) + 1, 0.0);
  for (int k = n - 1; k >= 1; --k) {
    b[size_t(k - 1)] = b[size_t(k + 1)] + 2.0 * k * a[size_t(k)];
  }
  b[0] *= 0.5;
  b.resize(size_t(std::max(n - 1, 1)));
  return b;
}

}  // namespace

// ---- residual and Newton ------------------------------------------------------

BvpResidual F_bvp(double beta, const OrbitPoint& x, const std::array<double, 4>& Pval,
                  int kmax) {
  const int m = x.m();
  const std::vector<double> conv = conv1(x.x[0], x.x[1]);
  BvpResidual r;
  for (int k = 0; k < m; ++k) {
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    const double w = (k == 0) ? 1.0 : 2.0 * sgn;
    r.eta1 += w * x.x[1][size_t(k)];
    r.eta2 += w * x.x[3][size_t(k)];
  }
  for (int i = 0; i < 4; ++i) r.f[size_t(i)].assign(size_t(kmax), 0.0);
  for (int i = 0; i < 4; ++i) {
    double s = x.x[size_t(i)][0];
    for (int k = 1; k < m; ++k) s += 2.0 * x.x[size_t(i)][size_t(k)];
    r.f[size_t(i)][0] = s - Pval[size_t(i)];
  }
  for (int k = 1; k < kmax; ++k) {
    const double tk = 2.0 * k;
    r.f[0][size_t(k)] = tk * at(x.x[0], k) + x.L * (pm(x.x[1], k) + pm(conv, k));
    r.f[1][size_t(k)] = tk * at(x.x[1], k) + x.L * pm(x.x[2], k);
    r.f[2][size_t(k)] = tk * at(x.x[2], k) + x.L * pm(x.x[3], k);
    r.f[3][size_t(k)] = tk * at(x.x[3], k) - x.L * (pm(x.x[0], k) + beta * pm(x.x[2], k));
  }
  return r;
}

double bvp_residual_norm(double beta, const OrbitPoint& x, const std::array<double, 4>& Pval) {
  const BvpResidual r = F_bvp(beta, x, Pval, x.m());
  double worst = std::max(std::fabs(r.eta1), std::fabs(r.eta2));
  for (int i = 0; i < 4; ++i) {
    double s = std::fabs(r.f[size_t(i)][0]);
    for (size_t k = 1; k < r.f[size_t(i)].size(); ++k) s += 2.0 * std::fabs(r.f[size_t(i)][k]);
    worst = std::max(worst, s);
  }
  return worst;
}

namespace {

// Finite-projection Jacobian, floating point (Newton path).
Mat bvp_jacobian(double beta, const OrbitPoint& x, const std::array<double, 4>& dP) {
  const int m = x.m();
  const int n = 4 * m + 2;
  Mat J = Mat::Zero(n, n);
  for (int k = 0; k < m; ++k) {
    const double w = (k == 0) ? 1.0 : ((k % 2 == 0) ? 2.0 : -2.0);
    J(0, off(4, m) + k) = w;
    J(1, off(6, m) + k) = w;
  }
  for (int i = 0; i < 4; ++i) {
    const int row = off(3 + i, m);
    J(row, 1) = -dP[size_t(i)];
    for (int k = 0; k < m; ++k) J(row, off(3 + i, m) + k) = (k == 0 ? 1.0 : 2.0);
  }
  const std::vector<double> conv = conv1(x.x[0], x.x[1]);
  auto add_shift = [&](int row, int blk, int k, double coef) {
    if (k + 1 < m) J(row, off(blk, m) + k + 1) += coef;
    J(row, off(blk, m) + k - 1) -= coef;
  };
  for (int k = 1; k < m; ++k) {
    const double tk = 2.0 * k;
    {
      const int row = off(3, m) + k;
      J(row, 0) = pm(x.x[1], k) + pm(conv, k);
      J(row, off(3, m) + k) += tk;
      add_shift(row, 4, k, x.L);
      for (int j = 0; j < m; ++j) {
        auto dc = [&](const std::vector<double>& y, int nn) {
          return j == 0 ? at(y, nn) : at(y, std::abs(nn - j)) + at(y, nn + j);
        };
        J(row, off(3, m) + j) += x.L * (dc(x.x[1], k + 1) - dc(x.x[1], k - 1));
        J(row, off(4, m) + j) += x.L * (dc(x.x[0], k + 1) - dc(x.x[0], k - 1));
      }
    }
    {
      const int row = off(4, m) + k;
      J(row, 0) = pm(x.x[2], k);
      J(row, off(4, m) + k) += tk;
      add_shift(row, 5, k, x.L);
    }
    {
      const int row = off(5, m) + k;
      J(row, 0) = pm(x.x[3], k);
      J(row, off(5, m) + k) += tk;
      add_shift(row, 6, k, x.L);
    }
    {
      const int row = off(6, m) + k;
      J(row, 0) = -(pm(x.x[0], k) + beta * pm(x.x[2], k));
      J(row, off(6, m) + k) += tk;
      add_shift(row, 3, k, -x.L);
      add_shift(row, 5, k, -x.L * beta);
    }
  }
  return J;
}

// Interval enclosure of the true Jacobian at exact float data.
IvMat bvp_jacobian_iv(double beta, const OrbitPoint& x, const std::array<Interval, 4>& dP) {
  const int m = x.m();
  const int n = 4 * m + 2;
  const Interval L0(x.L), bv(beta);
  IvMat J(n, n);
  for (int k = 0; k < m; ++k) {
    const Interval w((k == 0) ? 1.0 : ((k % 2 == 0) ? 2.0 : -2.0));
    J(0, off(4, m) + k) = w;
    J(1, off(6, m) + k) = w;
  }
  for (int i = 0; i < 4; ++i) {
    const int row = off(3 + i, m);
    J(row, 1) = -dP[size_t(i)];
    for (int k = 0; k < m; ++k) J(row, off(3 + i, m) + k) = Interval(k == 0 ? 1.0 : 2.0);
  }
  std::array<IVec, 4> xv;
  for (int c = 0; c < 4; ++c) xv[size_t(c)] = to_ivec(x.x[size_t(c)]);
  const IVec conv = conv1(xv[0], xv[1]);
  auto add_shift = [&](int row, int blk, int k, const Interval& coef) {
    if (k + 1 < m) J(row, off(blk, m) + k + 1) += coef;
    J(row, off(blk, m) + k - 1) -= coef;
  };
  for (int k = 1; k < m; ++k) {
    const Interval tk(2.0 * k);
    {
      const int row = off(3, m) + k;
      J(row, 0) = pm(xv[1], k) + pm(conv, k);
      J(row, off(3, m) + k) += tk;
      add_shift(row, 4, k, L0);
      for (int j = 0; j < m; ++j) {
        auto dc = [&](const IVec& y, int nn) {
          return j == 0 ? at(y, nn) : at(y, std::abs(nn - j)) + at(y, nn + j);
        };
        J(row, off(3, m) + j) += L0 * (dc(xv[1], k + 1) - dc(xv[1], k - 1));
        J(row, off(4, m) + j) += L0 * (dc(xv[0], k + 1) - dc(xv[0], k - 1));
      }
    }
    {
      const int row = off(4, m) + k;
      J(row, 0) = pm(xv[2], k);
      J(row, off(4, m) + k) += tk;
      add_shift(row, 5, k, L0);
    }
    {
      const int row = off(5, m) + k;
      J(row, 0) = pm(xv[3], k);
      J(row, off(5, m) + k) += tk;
      add_shift(row, 6, k, L0);
    }
    {
      const int row = off(6, m) + k;
      J(row, 0) = -(pm(xv[0], k) + bv * pm(xv[2], k));
      J(row, off(6, m) + k) += tk;
      add_shift(row, 3, k, -L0);
      add_shift(row, 5, k, -(L0 * bv));
    }
  }
  return J;
}

}  // namespace

OrbitPoint newton_solve_bvp(double beta, int m, const CSeq4& chart_coeffs, double gamma,
                            double rho, const OrbitPoint& init) {
  OrbitPoint x = init;
  for (int i = 0; i < 4; ++i) x.x[size_t(i)].resize(size_t(m), 0.0);
  const int n = 4 * m + 2;

  auto residual = [&](const OrbitPoint& p) {
    const auto Pv = eval_P_point(chart_coeffs, gamma, rho, p.psi, 0);
    return bvp_residual_norm(beta, p, Pv);
  };

  double res = residual(x);
  for (int iter = 0; iter < 50; ++iter) {
    if (res < 1e-10) return x;
    if (!std::isfinite(res)) break;
    const auto Pv = eval_P_point(chart_coeffs, gamma, rho, x.psi, 0);
    const auto dP = eval_P_point(chart_coeffs, gamma, rho, x.psi, 1);
    const BvpResidual F = F_bvp(beta, x, Pv, m);
    Vec rhs(n);
    rhs(0) = F.eta1;
    rhs(1) = F.eta2;
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < m; ++k) rhs(off(3 + i, m) + k) = F.f[size_t(i)][size_t(k)];
    const Mat J = bvp_jacobian(beta, x, dP);
    Eigen::PartialPivLU<Mat> lu(J);
    const Vec step = lu.solve(rhs);
    if (!step.allFinite()) throw SingularJacobian();

    double damp = 1.0;
    for (int half = 0; half < 8; ++half) {
      OrbitPoint trial = x;
      trial.L -= damp * step(0);
      trial.psi -= damp * step(1);
      for (int i = 0; i < 4; ++i)
        for (int k = 0; k < m; ++k) trial.x[size_t(i)][size_t(k)] -= damp * step(off(3 + i, m) + k);
      const double tres = residual(trial);
      if (tres < res || half == 7) {
        x = trial;
        res = tres;
        break;
      }
      damp *= 0.5;
    }
  }
  throw NewtonDiverged("orbit Newton stalled at residual " + std::to_string(res));
}

// ---- initial guess from a backward shot off the chart --------------------------

namespace {

struct Shot {
  std::vector<double> sigma;               // backward time
  std::vector<std::array<double, 4>> w;    // states
  std::vector<std::array<double, 4>> dw;   // derivatives along backward time
};

Shot integrate_backward(double beta, const std::array<double, 4>& start, double tmax,
                        double h) {
  auto rhs = [&](const std::array<double, 4>& v) {
    const auto p = rhs_psi(beta, v);
    return std::array<double, 4>{-p[0], -p[1], -p[2], -p[3]};
  };
  Shot s;
  std::array<double, 4> w = start;
  double t = 0.0;
  while (t <= tmax) {
    s.sigma.push_back(t);
    s.w.push_back(w);
    s.dw.push_back(rhs(w));
    double mag = 0.0;
    for (double c : w) mag = std::max(mag, std::fabs(c));
    if (mag > 1e3) break;
    const auto k1 = rhs(w);
    std::array<double, 4> w2, w3, w4;
    for (int i = 0; i < 4; ++i) w2[size_t(i)] = w[size_t(i)] + 0.5 * h * k1[size_t(i)];
    const auto k2 = rhs(w2);
    for (int i = 0; i < 4; ++i) w3[size_t(i)] = w[size_t(i)] + 0.5 * h * k2[size_t(i)];
    const auto k3 = rhs(w3);
    for (int i = 0; i < 4; ++i) w4[size_t(i)] = w[size_t(i)] + h * k3[size_t(i)];
    const auto k4 = rhs(w4);
    for (int i = 0; i < 4; ++i) {
      w[size_t(i)] += h / 6.0 * (k1[size_t(i)] + 2.0 * k2[size_t(i)] + 2.0 * k3[size_t(i)] +
                                 k4[size_t(i)]);
    }
    t += h;
  }
  return s;
}

// cubic Hermite sample of a stored trajectory
std::array<double, 4> sample_shot(const Shot& s, double t) {
  const auto it = std::upper_bound(s.sigma.begin(), s.sigma.end(), t);
  size_t i = size_t(std::max<long>(0, std::distance(s.sigma.begin(), it) - 1));
  i = std::min(i, s.sigma.size() - 2);
  const double h = s.sigma[i + 1] - s.sigma[i];
  const double u = (t - s.sigma[i]) / h;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  std::array<double, 4> out{};
  for (int c = 0; c < 4; ++c) {
    out[size_t(c)] = h00 * s.w[i][size_t(c)] + h * h10 * s.dw[i][size_t(c)] +
                     h01 * s.w[i + 1][size_t(c)] + h * h11 * s.dw[i + 1][size_t(c)];
  }
  return out;
}

struct Apex {
  bool found = false;
  double sigma = 0.0;  // crossing time of v2 = 0
  double v1 = 0.0;
  double v4 = 0.0;
};

// The symmetry section of the primary orbit is the v2 = 0 crossing at the
// deepest deflection: v1' = v2 (1 + v1), so crossings are extrema of v1, and
// the orbit's apex has v1 well below zero.  Half-orbit durations stay within
// [2.5, 7.5] over beta in [0.5, 1.9]; crossings outside that window belong to
// the near-chart spiral, to longer secondary orbits, or to drift blow-up.
Apex find_apex(const Shot& s) {
  Apex best;
  for (size_t i = 0; i + 1 < s.w.size(); ++i) {
    const double a = s.w[i][1], b = s.w[i + 1][1];
    if (a == 0.0 || a * b < 0.0) {
      const double u = (a == b) ? 0.0 : a / (a - b);
      const double sig = s.sigma[i] + u * (s.sigma[i + 1] - s.sigma[i]);
      if (sig < 2.5 || sig > 7.5) continue;
      const auto v = sample_shot(s, sig);
      if (v[0] > -0.2) continue;
      if (!best.found || std::fabs(v[3]) < std::fabs(best.v4)) {
        best.found = true;
        best.sigma = sig;
        best.v1 = v[0];
        best.v4 = v[3];
      }
    }
  }
  return best;
}

}  // namespace

OrbitPoint initial_orbit_guess(double beta, int m, const CSeq4& chart_coeffs, double gamma,
                               double rho) {
  // half-orbit durations stay below ~7 across beta in [0.5, 1.9]
  const double tmax = 8.5, h = 1.0 / 512.0;
  auto shoot = [&](double psi) {
    const auto p = eval_P_point(chart_coeffs, gamma, rho, psi, 0);
    return find_apex(integrate_backward(beta, p, tmax, h));
  };

  // coarse scan for the angle whose apex crossing best satisfies v4 = 0
  const int grid = 64;
  double best_psi = 0.0, best_score = std::numeric_limits<double>::infinity();
  for (int g = 0; g < grid; ++g) {
    const double psi = 2.0 * 3.14159265358979323846 * g / grid;
    const Apex a = shoot(psi);
    if (!a.found || std::fabs(a.v1) < 1e-4) continue;
    const double score = std::fabs(a.v4);
    if (score < best_score) {
      best_score = score;
      best_psi = psi;
    }
  }
  if (!std::isfinite(best_score)) throw NewtonDiverged("no symmetry crossing found in the shot");

  // golden-section refinement of |v4| around the best grid angle
  const double span = 2.0 * 3.14159265358979323846 / grid;
  double lo = best_psi - span, hi = best_psi + span;
  for (int it = 0; it < 40; ++it) {
    const double p1 = lo + 0.382 * (hi - lo), p2 = lo + 0.618 * (hi - lo);
    const Apex a1 = shoot(p1), a2 = shoot(p2);
    const double s1 = a1.found ? std::fabs(a1.v4) : 1e9;
    const double s2 = a2.found ? std::fabs(a2.v4) : 1e9;
    if (s1 < s2) hi = p2; else lo = p1;
  }
  const double psi = 0.5 * (lo + hi);
  const Apex apex = shoot(psi);
  if (!apex.found) throw NewtonDiverged("refined angle lost the symmetry crossing");

  const auto p = eval_P_point(chart_coeffs, gamma, rho, psi, 0);
  const Shot s = integrate_backward(beta, p, apex.sigma + 0.5, h);
  const double L = 0.5 * apex.sigma;

  // Chebyshev interpolation of v(t) = w(L(1-t)) at the extrema nodes
  const int K = 1024;
  std::array<std::vector<double>, 4> samples;
  for (int c = 0; c < 4; ++c) samples[size_t(c)].resize(size_t(K) + 1);
  for (int j = 0; j <= K; ++j) {
    const double t = std::cos(3.14159265358979323846 * j / K);
    const auto v = sample_shot(s, L * (1.0 - t));
    for (int c = 0; c < 4; ++c) samples[size_t(c)][size_t(j)] = v[size_t(c)];
  }
  OrbitPoint x;
  x.L = L;
  x.psi = psi;
  std::vector<double> costab(size_t(2 * K));
  for (int q = 0; q < 2 * K; ++q) costab[size_t(q)] = std::cos(3.14159265358979323846 * q / K);
  for (int c = 0; c < 4; ++c) {
    x.x[size_t(c)].assign(size_t(m), 0.0);
    for (int k = 0; k < m; ++k) {
      double acc = 0.5 * samples[size_t(c)][0];
      for (int j = 1; j < K; ++j) {
        acc += samples[size_t(c)][size_t(j)] * costab[size_t((size_t(j) * size_t(k)) % size_t(2 * K))];
      }
      acc += 0.5 * ((k % 2 == 0) ? 1.0 : -1.0) * samples[size_t(c)][size_t(K)];
      x.x[size_t(c)][size_t(k)] = acc / K;  // our convention absorbs the 1/2
    }
  }
  return x;
}

// ---- pointwise evaluation ------------------------------------------------------

std::array<double, 4> eval_orbit(const OrbitPoint& x, double t) {
  std::array<double, 4> out{};
  for (int c = 0; c < 4; ++c) out[size_t(c)] = clenshaw(plain_coeffs(x.x[size_t(c)]), t);
  return out;
}

double reconstruct_u(double v1) {
  if (!(v1 > -1.0)) throw LogDomain();
  return std::log1p(v1);
}

DiagnosticsReport diagnostics(const OrbitPoint& x, double beta, const CSeq4& chart_coeffs,
                              double gamma, double rho, int samples) {
  DiagnosticsReport rep;
  std::array<std::vector<double>, 4> plain, deriv;
  for (int c = 0; c < 4; ++c) {
    plain[size_t(c)] = plain_coeffs(x.x[size_t(c)]);
    deriv[size_t(c)] = derivative_coeffs(plain[size_t(c)]);
  }
  for (int i = 0; i < samples; ++i) {
    const double t = -1.0 + 2.0 * i / (samples - 1);
    std::array<double, 4> v{}, vd{};
    for (int c = 0; c < 4; ++c) {
      v[size_t(c)] = clenshaw(plain[size_t(c)], t);
      vd[size_t(c)] = clenshaw(deriv[size_t(c)], t);
    }
    const auto f = rhs_psi(beta, v);
    for (int c = 0; c < 4; ++c) {
      rep.ode_residual = std::max(rep.ode_residual, std::fabs(vd[size_t(c)] - x.L * f[size_t(c)]));
    }
  }
  const auto v1 = eval_orbit(x, 1.0);
  const auto P = eval_P_point(chart_coeffs, gamma, rho, x.psi, 0);
  for (int c = 0; c < 4; ++c) {
    rep.boundary_error = std::max(rep.boundary_error, std::fabs(v1[size_t(c)] - P[size_t(c)]));
  }
  const auto vm1 = eval_orbit(x, -1.0);
  rep.sym_v2 = std::fabs(vm1[1]);
  rep.sym_v4 = std::fabs(vm1[3]);
  return rep;
}

// ---- prover: beta0-side state ----------------------------------------------------

namespace {

// l1nu norm of a block column segment of A
Interval col_norm(const Mat& A, int row0, int rows, int col, const WeightVector& wv) {
  Interval s(0.0);
  for (int j = 0; j < rows; ++j) s += Interval(std::fabs(A(row0 + j, col))) * wv.w[size_t(j)];
  return s;
}

IvMat block_of(const MidRad& B, int row0, int rows, int col0, int cols) {
  IvMat G(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) G(i, j) = B.at(row0 + i, col0 + j);
  return G;
}

IvMat block_of(const Mat& A, int row0, int rows, int col0, int cols) {
  IvMat G(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) G(i, j) = Interval(A(row0 + i, col0 + j));
  return G;
}

}  // namespace

BvpProver::BvpProver(double beta0, const OrbitPoint& x0, const CSeq4& a0, int N_chart,
                     double gamma, double nu, double rho)
    : beta0_(beta0), nu_(nu), rho_(rho), x0_(x0), a0_(a0), N_(N_chart), gamma_(gamma),
      m_(x0.m()) {
  const int m = m_;
  const int n = 4 * m + 2;
  const Interval nuv(nu), rhov(rho);

  // residual matrix B = I - A DF(beta0, x0) with the chart derivative column
auto TT=std::chrono::steady_clock::now(); auto LAP=[&](const char* s){ auto t=std::chrono::steady_clock::now(); std::printf("  [ctor] %s %.2fs\n", s, std::chrono::duration<double>(t-TT).count()); TT=t; };
  const auto dP0 = eval_P(a0_, gamma_, rhov, Interval(x0.psi), 1);
  const IvMat Jiv = bvp_jacobian_iv(beta0, x0, dP0); LAP("jac_iv");
  Mat Jmid(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) Jmid(i, j) = Jiv(i, j).mid();
  Eigen::PartialPivLU<Mat> lu(Jmid);
  A_ = lu.inverse(); LAP("inverse");
  if (!A_.allFinite()) throw SingularJacobian();
  const MidRad B = residual_identity(A_, to_midrad(Jiv)); LAP("residual");

  // Z0 blockwise: dual norms on the scalar rows, operator norms below
  const WeightVector wv(m + 1, nuv);
  for (int l = 1; l <= 2; ++l) {
    Interval s(0.0);
    for (int i = 1; i <= 2; ++i) s += iv_abs(B.at(l - 1, i - 1));
    for (int i = 3; i <= 6; ++i) {
      std::vector<Interval> row(static_cast<size_t>(m));
      for (int k = 0; k < m; ++k) row[size_t(k)] = B.at(l - 1, off(i, m) + k);
      s += norm_dual_cheb(row, nuv);
    }
    Z0_[size_t(l - 1)] = s;
  }
  for (int l = 3; l <= 6; ++l) {
    Interval s(0.0);
    for (int i = 1; i <= 2; ++i) {
      std::vector<Interval> colv(static_cast<size_t>(m));
      for (int k = 0; k < m; ++k) colv[size_t(k)] = B.at(off(l, m) + k, i - 1);
      s += norm_l1nu_cheb(colv, nuv);
    }
    for (int i = 3; i <= 6; ++i) {
      s += opnorm_block_cheb(block_of(B, off(l, m), m, off(i, m), m), nuv, false);
    }
    Z0_[size_t(l - 1)] = s;
  }

  LAP("z0_blocks");
  // block norms of A
  for (int l = 1; l <= 2; ++l)
    for (int i = 1; i <= 2; ++i) Ascal_[l - 1][i - 1] = Interval(std::fabs(A_(l - 1, i - 1)));
  for (int l = 1; l <= 2; ++l) {
    for (int i = 3; i <= 6; ++i) {
      std::vector<Interval> row(static_cast<size_t>(m));
      for (int k = 0; k < m; ++k) row[size_t(k)] = Interval(A_(l - 1, off(i, m) + k));
      Adual_[l - 1][i - 3] = norm_dual_cheb(row, nuv);
    }
  }
  for (int l = 3; l <= 6; ++l)
    for (int i = 1; i <= 2; ++i) Acol_[l - 3][i - 1] = col_norm(A_, off(l, m), m, i - 1, wv);
  for (int l = 3; l <= 6; ++l) {
    for (int i = 3; i <= 6; ++i) {
      Aop_[l - 3][i - 3] =
          opnorm_block_cheb(block_of(A_, off(l, m), m, off(i, m), m), nuv, l == i);
      Acol0_[l - 3][i - 3] = col_norm(A_, off(l, m), m, off(i, m), wv);
    }
  }

  LAP("a_norms");
  // x0-side convolution data
  c00_ = conv1(to_ivec(x0.x[0]), to_ivec(x0.x[1]));
  for (int c = 0; c < 2; ++c) {
    const IVec xc = to_ivec(x0.x[size_t(c)]);
    Qx0_[size_t(c)].resize(size_t(m) + 2);
    Qhx0_[size_t(c)].resize(size_t(m) + 2);
    for (int j = 0; j <= m + 1; ++j) {
      const QkPair q = qk_estimates(xc, j, nuv, m);
      Qx0_[size_t(c)][size_t(j)] = q.q;
      Qhx0_[size_t(c)][size_t(j)] = q.qhat;
    }
  }
  LAP("q_tables");
}

// ---- the S splitting ---------------------------------------------------------

BvpSCoeffs BvpProver::s_coefficients(double beta1, const OrbitPoint& x1,
                                     const CSeq4& a1) const {
  const int m = m_;
  const Interval rhov(rho_);
  const Interval b0(beta0_);
  const Interval dbeta = Interval(beta1) - Interval(beta0_);
  const Interval L0(x0_.L);
  const Interval dL = Interval(x1.L) - Interval(x0_.L);
  const Interval dpsi = Interval(x1.psi) - Interval(x0_.psi);
  const Interval psiH = Interval(std::min(x0_.psi, x1.psi), std::max(x0_.psi, x1.psi));

  std::array<IVec, 4> dx;
  for (int c = 0; c < 4; ++c) dx[size_t(c)] = delta_ivec(x1.x[size_t(c)], x0_.x[size_t(c)]);
  const IVec x01 = to_ivec(x0_.x[0]), x02 = to_ivec(x0_.x[1]);
  const IVec x03 = to_ivec(x0_.x[2]), x04 = to_ivec(x0_.x[3]);
  const IVec cd0 = conv1(dx[0], x02);
  const IVec c0d = conv1(x01, dx[1]);
  const IVec cdd = conv1(dx[0], dx[1]);

  const auto P0_psi0 = eval_P(a0_, gamma_, rhov, Interval(x0_.psi), 0);
  const auto P1_psi0 = eval_P(a1, gamma_, rhov, Interval(x0_.psi), 0);
  const auto dP0_H = eval_P(a0_, gamma_, rhov, psiH, 1);
  const auto dP1_H = eval_P(a1, gamma_, rhov, psiH, 1);

  BvpSCoeffs out;
  for (auto& row : out.scalar) row.fill(Interval(0.0));
  for (auto& row : out.seq)
    for (auto& v : row) v.assign(size_t(2 * m), Interval(0.0));

  // symmetry rows: eta(beta_s, x_s) = S0 + s S1
  for (int which = 0; which < 2; ++which) {
    const IVec& seq0 = which == 0 ? x02 : x04;
    const IVec& seqd = which == 0 ? dx[1] : dx[3];
    Interval s0 = at(seq0, 0), s1 = at(seqd, 0);
    for (int k = 1; k < m; ++k) {
      const double w = (k % 2 == 0) ? 2.0 : -2.0;
      s0 += w * at(seq0, k);
      s1 += w * at(seqd, k);
    }
    out.scalar[0][size_t(which)] = s0;
    out.scalar[1][size_t(which)] = s1;
  }

  auto& S = out.seq;
  for (int j = 0; j < 4; ++j) {
    // k = 0: boundary rows, with the mean value theorem on psi
    const IVec& xj = j == 0 ? x01 : j == 1 ? x02 : j == 2 ? x03 : x04;
    Interval sum0 = at(xj, 0), sumd = at(dx[size_t(j)], 0);
    for (int k = 1; k < m; ++k) {
      sum0 += 2.0 * at(xj, k);
      sumd += 2.0 * at(dx[size_t(j)], k);
    }
    const Interval dPj = P1_psi0[size_t(j)] - P0_psi0[size_t(j)];
    S[0][size_t(j)][0] = sum0 - P0_psi0[size_t(j)];
    S[1][size_t(j)][0] = sumd - dPj - dpsi * dP0_H[size_t(j)];
    S[2][size_t(j)][0] = -dpsi * (dP1_H[size_t(j)] - dP0_H[size_t(j)]);
    S[3][size_t(j)][0] = Interval(0.0);
  }
  for (int k = 1; k < 2 * m; ++k) {
    const Interval tk(2.0 * k);
    // f^(1)
    S[0][0][size_t(k)] = tk * at(x01, k) + L0 * (pm(x02, k) + pm(c00_, k));
    S[1][0][size_t(k)] = tk * at(dx[0], k) +
                         L0 * (pm(dx[1], k) + pm(cd0, k) + pm(c0d, k)) +
                         dL * (pm(x02, k) + pm(c00_, k));
    S[2][0][size_t(k)] = L0 * pm(cdd, k) + dL * (pm(dx[1], k) + pm(cd0, k) + pm(c0d, k));
    S[3][0][size_t(k)] = dL * pm(cdd, k);
    // f^(2)
    S[0][1][size_t(k)] = tk * at(x02, k) + L0 * pm(x03, k);
    S[1][1][size_t(k)] = L0 * pm(dx[2], k) + tk * at(dx[1], k) + dL * pm(x03, k);
    S[2][1][size_t(k)] = dL * pm(dx[2], k);
    // f^(3)
    S[0][2][size_t(k)] = tk * at(x03, k) + L0 * pm(x04, k);
    S[1][2][size_t(k)] = L0 * pm(dx[3], k) + tk * at(dx[2], k) + dL * pm(x04, k);
    S[2][2][size_t(k)] = dL * pm(dx[3], k);
    // f^(4)
    S[0][3][size_t(k)] = tk * at(x04, k) - L0 * (pm(x01, k) + b0 * pm(x03, k));
    S[1][3][size_t(k)] = tk * at(dx[3], k) - dL * (pm(x01, k) + b0 * pm(x03, k)) -
                         L0 * (pm(dx[0], k) + b0 * pm(dx[2], k) + dbeta * pm(x03, k));
    S[2][3][size_t(k)] = -dL * (pm(dx[0], k) + b0 * pm(dx[2], k) + dbeta * pm(x03, k)) -
                         L0 * dbeta * pm(dx[2], k);
    S[3][3][size_t(k)] = -dL * dbeta * pm(dx[2], k);
  }
  return out;
}

// ---- the bounds ------------------------------------------------------------------

BvpBounds BvpProver::bounds(double beta1, const OrbitPoint& x1, const CSeq4& a1,
                            double r_m) const {
  const int m = m_;
  const Interval nuv(nu_), rhov(rho_);
  const Interval b0(beta0_), b1(beta1);
  const Interval dbeta = Interval(beta1) - Interval(beta0_);
  const Interval L0(x0_.L);
  const Interval dL = Interval(x1.L) - Interval(x0_.L);
  const Interval dpsi = Interval(x1.psi) - Interval(x0_.psi);

  std::array<IVec, 4> dx;
  for (int c = 0; c < 4; ++c) dx[size_t(c)] = delta_ivec(x1.x[size_t(c)], x0_.x[size_t(c)]);
  const IVec x01 = to_ivec(x0_.x[0]), x02 = to_ivec(x0_.x[1]);
  const IVec x03 = to_ivec(x0_.x[2]), x04 = to_ivec(x0_.x[3]);
  const IVec cd0 = conv1(dx[0], x02);
  const IVec c0d = conv1(x01, dx[1]);
  const IVec cdd = conv1(dx[0], dx[1]);

  // powers of nu
  std::vector<Interval> pw(size_t(2 * m) + 2, Interval(1.0));
  for (size_t k = 1; k < pw.size(); ++k) pw[k] = pw[k - 1] * nuv;
  const Interval inv_num = Interval(1.0) / pw[size_t(m)];

  // Lambda sums over the chart coefficients at radius gamma*rho
  std::array<Interval, 4> Lam, LamT;
  Lam.fill(Interval(0.0));
  LamT.fill(Interval(0.0));
  {
    const Interval gr = gamma_ * rhov;
    std::vector<Interval> gpw(size_t(N_), Interval(1.0));
    for (int d = 1; d < N_; ++d) gpw[size_t(d)] = gpw[size_t(d - 1)] * gr;
    for (int t = 0; t < tri_size(N_); ++t) {
      const Alpha al = tri_alpha(t);
      const double n2 = double((al.a1 - al.a2) * (al.a1 - al.a2));
      const double n1 = std::fabs(double(al.a1 - al.a2));
      for (int j = 0; j < 4; ++j) {
        const Cpx c0 = a0_.c[size_t(j)].c[size_t(t)];
        const Cpx c1 = a1.c[size_t(j)].c[size_t(t)];
        const CInterval d01(Interval(c1.real()) - Interval(c0.real()),
                            Interval(c1.imag()) - Interval(c0.imag()));
        const Interval a0abs = abs_iv(CInterval(Interval(c0.real()), Interval(c0.imag())));
        LamT[size_t(j)] += n2 * a0abs * gpw[size_t(al.deg())];
        Lam[size_t(j)] += n1 * abs_iv(d01) * gpw[size_t(al.deg())];
      }
    }
    for (int j = 0; j < 4; ++j) Lam[size_t(j)] = iv_abs(dpsi) * LamT[size_t(j)] + Lam[size_t(j)];
  }

  const BvpSCoeffs sc = s_coefficients(beta1, x1, a1);
  const auto& S = sc.seq;

  // ---- the Y bound -------------------------------------------------------------
  const int n = 4 * m + 2;
  const Interval muval = rhov * Interval(r_m);  // chart domain radius is 1
  std::array<Interval, 6> Y;
  {
    std::vector<Interval> V(size_t(n), Interval(0.0));
    for (int i = 0; i < 4; ++i) {
      // assemble S_i^{[m]} as a midrad column and push through A
      IvMat col(n, 1);
      col(0, 0) = sc.scalar[size_t(i)][0];
      col(1, 0) = sc.scalar[size_t(i)][1];
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < m; ++k) col(off(3 + j, m) + k, 0) = S[size_t(i)][size_t(j)][size_t(k)];
      const MidRad prod = mul_enclose(A_, to_midrad(col));
      for (int r = 0; r < n; ++r) V[size_t(r)] += iv_abs(prod.at(r, 0));
    }
    // |A| mu: the chart error hits the k = 0 rows of the four sequence blocks
    for (int r = 0; r < n; ++r) {
      Interval s(0.0);
      for (int j = 3; j <= 6; ++j) s += Interval(std::fabs(A_(r, off(j, m))));
      V[size_t(r)] += s * muval;
    }
    Y[0] = V[0];
    Y[1] = V[1];
    for (int l = 3; l <= 6; ++l) {
      Interval s = V[size_t(off(l, m))];
      for (int k = 1; k < m; ++k) s += 2.0 * V[size_t(off(l, m) + k)] * pw[size_t(k)];
      for (int k = m; k < 2 * m; ++k) {
        Interval w(0.0);
        for (int i = 0; i < 4; ++i) w += iv_abs(S[size_t(i)][size_t(l - 3)][size_t(k)]);
        s += 2.0 * w / Interval(2.0 * k) * pw[size_t(k)];
      }
      Y[size_t(l - 1)] = s;
    }
  }

  // ---- W1, W2, W3 ----------------------------------------------------------------
  const Interval hbound = 2.0 * rhov * derivative_error_bound(r_m, 1.0, rho_);
  std::array<Interval, 4> W1;
  for (int i = 0; i < 4; ++i) W1[size_t(i)] = Lam[size_t(i)] + hbound + inv_num;

  // the index shift k±1 acting on l^1_nu is bounded by 2 nu (a mass at k = 0
  // lands on k = 1 with weight ratio 2 nu; higher indices give nu + 1/nu)
  const Interval sfac = iv_max(2.0 * nuv, nuv + Interval(1.0) / nuv);
  const Interval n01 = norm_l1nu_cheb(x01, nuv), n02 = norm_l1nu_cheb(x02, nuv);
  const Interval nd1 = norm_l1nu_cheb(dx[0], nuv), nd2 = norm_l1nu_cheb(dx[1], nuv);
  std::array<Interval, 4> W2;
  W2[0] = LamT[0] + 2.0 * sfac * (n01 + n02 + nd1 + nd2 + 1.0 + L0 + iv_abs(dL));
  W2[1] = LamT[1] + 2.0 * sfac;
  W2[2] = LamT[2] + 2.0 * sfac;
  W2[3] = LamT[3] + 2.0 * sfac * (b1 + 1.0);
  const Interval W3 = 3.0 * sfac;

  // ---- the z ledgers (k = 1..m-1) ------------------------------------------------
  std::array<IVec, 2> Qd;
  for (int c = 0; c < 2; ++c) {
    Qd[size_t(c)].resize(size_t(m) + 2);
    for (int j = 0; j <= m + 1; ++j) Qd[size_t(c)][size_t(j)] = qk_estimates(dx[size_t(c)], j, nuv, m).q;
  }
  std::array<IVec, 4> zled, zhat, zhh;
  for (auto& v : zled) v.assign(size_t(m), Interval(0.0));
  for (auto& v : zhat) v.assign(size_t(m), Interval(0.0));
  for (auto& v : zhh) v.assign(size_t(m), Interval(0.0));
  const Interval adL = iv_abs(dL);
  const Interval z6c = 2.0 * (iv_abs(L0 * dbeta + dL * b0) + adL);
  const Interval z6cc = 2.0 * iv_abs(dL * dbeta);
  for (int k = 1; k < m; ++k) {
    const Interval invk = Interval(1.0) / pw[size_t(k - 1)];
    const Interval om1 = Qx0_[0][size_t(k - 1)] + Qx0_[0][size_t(k + 1)];
    const Interval om2 = Qx0_[1][size_t(k - 1)] + Qx0_[1][size_t(k + 1)];
    const Interval omh1 = Qhx0_[0][size_t(k - 1)] + Qhx0_[0][size_t(k + 1)];
    const Interval omh2 = Qhx0_[1][size_t(k - 1)] + Qhx0_[1][size_t(k + 1)];
    const Interval dom1 = Qd[0][size_t(k - 1)] + Qd[0][size_t(k + 1)];
    const Interval dom2 = Qd[1][size_t(k - 1)] + Qd[1][size_t(k + 1)];
    zled[0][size_t(k)] = adL * (2.0 * invk + om1 + om2) + (L0 + adL) * (dom1 + dom2) +
                         L0 * (omh1 + omh2);
    zled[1][size_t(k)] = 2.0 * adL * invk;
    zled[2][size_t(k)] = 2.0 * adL * invk;
    zled[3][size_t(k)] = (z6c + z6cc) * invk;

    zhat[0][size_t(k)] = pm(dx[1], k) + pm(c0d, k) + pm(cd0, k);
    zhat[1][size_t(k)] = pm(dx[2], k);
    zhat[2][size_t(k)] = pm(dx[3], k);
    zhat[3][size_t(k)] = dbeta * pm(x03, k) + pm(dx[0], k) + b0 * pm(dx[2], k);

    zhh[0][size_t(k)] = pm(cdd, k);
    zhh[3][size_t(k)] = dbeta * pm(dx[2], k);
  }

  // row estimate |sum_k A_k ztilde_k^{(i)}| for one block row (k >= 1 only)
  auto zrow = [&](auto acc, int i) {
    // acc(k) -> A entry at column k of the block
    Interval term(0.0);
    Interval sz(0.0), sh(0.0), shh(0.0);
    for (int k = 1; k < m; ++k) {
      const Interval a = acc(k);
      sz += iv_abs(a) * zled[size_t(i - 3)][size_t(k)];
      sh += a * zhat[size_t(i - 3)][size_t(k)];
      if (i == 3 || i == 6) shh += a * zhh[size_t(i - 3)][size_t(k)];
    }
    const Interval corner =
        iv_abs(acc(m - 1)) * L0 * ((i == 6 ? b0 : Interval(0.0)) + 1.0) * inv_num;
    term = corner + sz + iv_abs(sh) + iv_abs(shh);
    return term;
  };

  // ---- tail sums Z_l^inf ----------------------------------------------------------
  std::array<Interval, 4> Zinf;
  {
    const Interval shift_tail = (nuv + Interval(1.0) / nuv) / Interval(2.0 * m);
    Interval conv_tail(0.0), conv_tail_dd(0.0);
    for (int k = m; k < 2 * m; ++k) {
      const Interval f = pw[size_t(k)] / Interval(double(k));
      conv_tail += f * (iv_abs(pm(c00_, k)) + iv_abs(pm(c0d, k)) + iv_abs(pm(cd0, k)));
      conv_tail_dd += f * iv_abs(pm(cdd, k));
    }
    const Interval numm = pw[size_t(m)] / Interval(double(m));
    Zinf[0] = shift_tail * (L0 + adL) * (n01 + n02 + nd1 + nd2 + 1.0) + conv_tail +
              conv_tail_dd + numm * (iv_abs(at(dx[1], m - 1)) + iv_abs(at(x02, m - 1)));
    Zinf[1] = shift_tail * (L0 + adL) +
              numm * (iv_abs(at(x03, m - 1)) + iv_abs(at(dx[2], m - 1)));
    Zinf[2] = shift_tail * (L0 + adL) +
              numm * (iv_abs(at(x04, m - 1)) + iv_abs(at(dx[3], m - 1)));
    Zinf[3] = shift_tail * (L0 + adL) * (1.0 + b1) +
              numm * (b1 * (iv_abs(at(x03, m - 1)) + iv_abs(at(dx[2], m - 1))) +
                      iv_abs(at(x01, m - 1)) + iv_abs(at(dx[0], m - 1)));
  }

  // ---- assembly of Z1, Z2, Z3 -------------------------------------------------------
  std::array<Interval, 6> Z1, Z2, Z3;
  const WeightVector wv(m + 1, nuv);
  for (int l = 1; l <= 2; ++l) {
    Interval s = (Ascal_[l - 1][0] + Ascal_[l - 1][1]) * inv_num;
    for (int i = 3; i <= 6; ++i) {
      const int row = l - 1;
      s += Interval(std::fabs(A_(row, off(i, m)))) * W1[size_t(i - 3)];
      s += zrow([&](int k) { return Interval(A_(row, off(i, m) + k)); }, i);
    }
    Z1[size_t(l - 1)] = s;
    Interval s2(0.0);
    for (int i = 3; i <= 6; ++i) s2 += Adual_[l - 1][i - 3] * W2[size_t(i - 3)];
    Z2[size_t(l - 1)] = s2;
    Z3[size_t(l - 1)] = Adual_[l - 1][0] * W3;
  }
  for (int l = 3; l <= 6; ++l) {
    Interval s = (Acol_[l - 3][0] + Acol_[l - 3][1]) * inv_num;
    for (int i = 3; i <= 6; ++i) {
      s += W1[size_t(i - 3)] * Acol0_[l - 3][i - 3];
      // weighted row sums over the m x m block
      Interval rows(0.0);
      for (int j = 0; j < m; ++j) {
        const int row = off(l, m) + j;
        rows += wv.w[size_t(j)] * zrow([&](int k) { return Interval(A_(row, off(i, m) + k)); }, i);
      }
      s += rows;
    }
    s += Zinf[size_t(l - 3)];
    Z1[size_t(l - 1)] = s;
    Interval s2(0.0);
    for (int i = 3; i <= 6; ++i) s2 += Aop_[l - 3][i - 3] * W2[size_t(i - 3)];
    Z2[size_t(l - 1)] = s2;
    Z3[size_t(l - 1)] = Aop_[l - 3][0] * W3;
  }

  BvpBounds out;
  out.Y = Y;
  out.Z0 = Z0_;
  out.Z1 = Z1;
  out.Z2 = Z2;
  out.Z3 = Z3;
  return out;
}

BvpResult validate_bvp_range(const BvpProver& prover, double beta1, const OrbitPoint& x1,
                             const CSeq4& a1, double r_m) {
  const BvpBounds b = prover.bounds(beta1, x1, a1, r_m);
  const auto polys = b.polys();
  const RadiiReport rep = radii_check(polys);
  if (!rep.ok) {
    throw NoValidRadius("orbit radii check failed on component " +
                        std::to_string(rep.worst_component + 1) + " for [" +
                        std::to_string(prover.beta0()) + "," + std::to_string(beta1) + "]");
  }
  BvpResult out;
  out.cert.beta0 = prover.beta0();
  out.cert.beta1 = beta1;
  out.cert.m = prover.x0().m();
  out.cert.nu = prover.nu();
  out.cert.rho = prover.rho();
  out.cert.r = rep.r;
  for (int l = 0; l < 6; ++l) {
    out.cert.Y[size_t(l)] = b.Y[size_t(l)].hi;
    out.cert.Z0[size_t(l)] = b.Z0[size_t(l)].hi;
    out.cert.Z1[size_t(l)] = b.Z1[size_t(l)].hi;
    out.cert.Z2[size_t(l)] = b.Z2[size_t(l)].hi;
    out.cert.Z3[size_t(l)] = b.Z3[size_t(l)].hi;
  }
  out.x0 = prover.x0();
  out.x1 = x1;
  return out;
}

}  // namespace hb
