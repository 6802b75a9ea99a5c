#include "hb/manifold.hpp"

#include <Eigen/LU>

namespace hb {

namespace {

using CISeq = Taylor2<CInterval>;

CISeq to_iv(const Taylor2<Cpx>& a) {
  CISeq r(a.N);
  for (size_t i = 0; i < a.c.size(); ++i) {
    r.c[i] = CInterval(a.c[i].real(), a.c[i].imag());
  }
  return r;
}

// thin enclosure of the exact difference a1 - a0
CISeq delta_iv(const Taylor2<Cpx>& a1, const Taylor2<Cpx>& a0) {
  CISeq r(a0.N);
  for (size_t i = 0; i < a0.c.size(); ++i) {
    r.c[i] = CInterval(Interval(a1.c[i].real()) - Interval(a0.c[i].real()),
                       Interval(a1.c[i].imag()) - Interval(a0.c[i].imag()));
  }
  return r;
}

// multi-index eigenvalue combination alpha1*lambda + alpha2*conj(lambda)
CInterval mu_of(const Alpha& al, const CInterval& lambda) {
  return double(al.a1) * lambda + double(al.a2) * lambda.conj();
}
Cpx mu_of(const Alpha& al, const Cpx& lambda) {
  return double(al.a1) * lambda + double(al.a2) * std::conj(lambda);
}

constexpr int kComp = 4;
inline int gidx(int t, int comp) { return kComp * t + comp; }

}  // namespace

// ---- eigen data -------------------------------------------------------------

EigenData eigen_data(const Interval& beta) {
  if (!(beta.lo >= 0.0 && beta.hi < 2.0)) throw BetaOutOfRange();
  EigenData e;
  e.beta = beta;
  const Interval re = -0.5 * iv_sqrt(2.0 - beta);
  const Interval im = 0.5 * iv_sqrt(2.0 + beta);
  e.lambda = CInterval(re, im);
  e.V[0] = CInterval(1.0);
  for (int k = 1; k < 4; ++k) e.V[size_t(k)] = e.V[size_t(k - 1)] * e.lambda;
  return e;
}

CInterval eigen_dlambda(const Interval& beta) {
  const Interval re = Interval(0.25) / iv_sqrt(2.0 - beta);
  const Interval im = Interval(0.25) / iv_sqrt(2.0 + beta);
  return CInterval(re, im);
}

std::array<CInterval, 4> eigen_dV(const Interval& beta) {
  const EigenData e = eigen_data(beta);
  const CInterval dl = eigen_dlambda(beta);
  std::array<CInterval, 4> d;
  d[0] = CInterval(0.0);
  d[1] = dl;
  d[2] = 2.0 * e.lambda * dl;
  d[3] = 3.0 * e.lambda * e.lambda * dl;
  return d;
}

EigenPoint eigen_point(double beta) {
  if (!(beta >= 0.0 && beta < 2.0)) throw BetaOutOfRange();
  EigenPoint e;
  e.lambda = Cpx(-0.5 * std::sqrt(2.0 - beta), 0.5 * std::sqrt(2.0 + beta));
  e.V[0] = Cpx(1.0);
  for (int k = 1; k < 4; ++k) e.V[size_t(k)] = e.V[size_t(k - 1)] * e.lambda;
  return e;
}

// ---- F and its Jacobian (floating point) -------------------------------------

CSeq4 F_manifold(double beta, const CSeq4& a, int Nout) {
  const EigenPoint ep = eigen_point(beta);
  const Taylor2<Cpx> q = cauchy2(a.c[0], a.c[1]);
  CSeq4 F(Nout);
  for (int t = 0; t < tri_size(Nout); ++t) {
    const Alpha al = tri_alpha(t);
    const int d = al.deg();
    std::array<Cpx, 4> av{}, Fv{};
    for (int j = 0; j < 4; ++j) av[size_t(j)] = a.c[size_t(j)].get(al.a1, al.a2);
    if (d == 0) {
      for (int j = 0; j < 4; ++j) Fv[size_t(j)] = av[size_t(j)];
    } else if (d == 1) {
      for (int j = 0; j < 4; ++j) {
        const Cpx v = (al.a1 == 1) ? ep.V[size_t(j)] : std::conj(ep.V[size_t(j)]);
        Fv[size_t(j)] = av[size_t(j)] - v;
      }
    } else {
      const Cpx mu = mu_of(al, ep.lambda);
      const Cpx qa = q.get(al.a1, al.a2);
      Fv[0] = mu * av[0] - (av[1] + qa);
      Fv[1] = mu * av[1] - av[2];
      Fv[2] = mu * av[2] - av[3];
      Fv[3] = mu * av[3] - (-av[0] - beta * av[2]);
    }
    for (int j = 0; j < 4; ++j) F.c[size_t(j)].c[size_t(t)] = Fv[size_t(j)];
  }
  return F;
}

double residual_norm(double beta, const CSeq4& a) {
  const CSeq4 F = F_manifold(beta, a, a.N);
  double worst = 0.0;
  for (int j = 0; j < 4; ++j) {
    double s = 0.0;
    for (const Cpx& v : F.c[size_t(j)].c) s += std::abs(v);
    worst = std::max(worst, s);
  }
  return worst;
}

namespace {

// Jacobian of the truncated map, multi-index major with 4 components each
CMat assemble_DF(double beta, const CSeq4& a, const Cpx& lambda) {
  const int T = tri_size(a.N);
  CMat D = CMat::Zero(4 * T, 4 * T);
  for (int t = 0; t < T; ++t) {
    const Alpha al = tri_alpha(t);
    if (al.deg() <= 1) {
      for (int j = 0; j < 4; ++j) D(gidx(t, j), gidx(t, j)) = 1.0;
      continue;
    }
    const Cpx mu = mu_of(al, lambda);
    // linear block: mu I - DPsi(0)
    D(gidx(t, 0), gidx(t, 0)) = mu;  D(gidx(t, 0), gidx(t, 1)) = -1.0;
    D(gidx(t, 1), gidx(t, 1)) = mu;  D(gidx(t, 1), gidx(t, 2)) = -1.0;
    D(gidx(t, 2), gidx(t, 2)) = mu;  D(gidx(t, 2), gidx(t, 3)) = -1.0;
    D(gidx(t, 3), gidx(t, 0)) = 1.0; D(gidx(t, 3), gidx(t, 2)) = beta;
    D(gidx(t, 3), gidx(t, 3)) = mu;
    // quadratic part of the first component: -(a1 * a2)
    for (int s1 = 0; s1 <= al.a1; ++s1) {
      for (int s2 = 0; s2 <= al.a2; ++s2) {
        const int ts = tri_index(s1, s2);
        const int tr = tri_index(al.a1 - s1, al.a2 - s2);
        D(gidx(t, 0), gidx(ts, 0)) -= a.c[1].c[size_t(tr)];
        D(gidx(t, 0), gidx(ts, 1)) -= a.c[0].c[size_t(tr)];
      }
    }
  }
  return D;
}

// Midpoint-radius enclosure of the true Jacobian at exact float data; only
// the lambda entries carry a radius.
CMidRad assemble_DF_enclosure(double beta, const CSeq4& a) {
  const EigenPoint ep = eigen_point(beta);
  const EigenData ei = eigen_data(Interval(beta));
  CMidRad D;
  D.mid = assemble_DF(beta, a, ep.lambda);
  D.rad = Mat::Zero(D.mid.rows(), D.mid.cols());
  const int T = tri_size(a.N);
  for (int t = 0; t < T; ++t) {
    const Alpha al = tri_alpha(t);
    if (al.deg() <= 1) continue;
    const CInterval mu = mu_of(al, ei.lambda);
    const Cpx mupt = mu_of(al, ep.lambda);
    const double dre = std::max(next_up(mupt.real() - mu.re.lo), next_up(mu.re.hi - mupt.real()));
    const double dim = std::max(next_up(mupt.imag() - mu.im.lo), next_up(mu.im.hi - mupt.imag()));
    const double r = next_up(std::max(dre, dim));
    for (int j = 0; j < 4; ++j) D.rad(gidx(t, j), gidx(t, j)) = r;
  }
  return D;
}

}  // namespace

CSeq4 recursive_solve(double beta, int N) {
  const EigenPoint ep = eigen_point(beta);
  CSeq4 a(N);
  if (N >= 2) {
    for (int j = 0; j < 4; ++j) {
      a.c[size_t(j)].at(1, 0) = ep.V[size_t(j)];
      a.c[size_t(j)].at(0, 1) = std::conj(ep.V[size_t(j)]);
    }
  }
  for (int d = 2; d < N; ++d) {
    for (int a2 = 0; a2 <= d; ++a2) {
      const Alpha al{d - a2, a2};
      // quadratic source from strictly lower degrees (a_0 = 0)
      Cpx q(0.0);
      for (int s1 = 0; s1 <= al.a1; ++s1) {
        for (int s2 = 0; s2 <= al.a2; ++s2) {
          const int ds = s1 + s2;
          if (ds == 0 || ds == d) continue;
          q += a.c[0].at(s1, s2) * a.c[1].at(al.a1 - s1, al.a2 - s2);
        }
      }
      const Cpx mu = mu_of(al, ep.lambda);
      Eigen::Matrix4cd M;
      M << mu, -1, 0, 0,
           0, mu, -1, 0,
           0, 0, mu, -1,
           1, 0, beta, mu;
      Eigen::Vector4cd rhs(q, 0, 0, 0);
      const Eigen::Vector4cd x = M.lu().solve(rhs);
      for (int j = 0; j < 4; ++j) a.c[size_t(j)].at(al.a1, al.a2) = x(j);
    }
  }
  symmetrize(a);
  return a;
}

void symmetrize(CSeq4& a) {
  for (int t = 0; t < tri_size(a.N); ++t) {
    const Alpha al = tri_alpha(t);
    if (al.a1 < al.a2) continue;
    for (int j = 0; j < 4; ++j) {
      if (al.a1 == al.a2) {
        a.c[size_t(j)].at(al.a1, al.a2) = Cpx(a.c[size_t(j)].at(al.a1, al.a2).real(), 0.0);
      } else {
        a.c[size_t(j)].at(al.a2, al.a1) = std::conj(a.c[size_t(j)].at(al.a1, al.a2));
      }
    }
  }
}

CSeq4 newton_solve_manifold(double beta, int N, const CSeq4* init) {
  const EigenPoint ep = eigen_point(beta);
  CSeq4 a(N);
  if (init) {
    a = *init;
  } else if (N >= 2) {
    for (int j = 0; j < 4; ++j) {
      a.c[size_t(j)].at(1, 0) = ep.V[size_t(j)];
      a.c[size_t(j)].at(0, 1) = std::conj(ep.V[size_t(j)]);
    }
  }
  const int T = tri_size(N);
  for (int iter = 0; iter <= 30; ++iter) {
    const double res = residual_norm(beta, a);
    if (res < 1e-12) {
      symmetrize(a);
      return a;
    }
    if (iter == 30 || !std::isfinite(res)) {
      throw NewtonDiverged("manifold Newton stalled at residual " + std::to_string(res));
    }
    const CSeq4 F = F_manifold(beta, a, N);
    CVec rhs(4 * T);
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < 4; ++j) rhs(gidx(t, j)) = F.c[size_t(j)].c[size_t(t)];
    const CMat D = assemble_DF(beta, a, ep.lambda);
    Eigen::PartialPivLU<CMat> lu(D);
    const CVec step = lu.solve(rhs);
    if (!step.allFinite()) throw SingularJacobian();
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < 4; ++j) a.c[size_t(j)].c[size_t(t)] -= step(gidx(t, j));
  }
  throw NewtonDiverged("unreachable");
}

CSeq4 rescale(const CSeq4& a, double gamma) {
  CSeq4 r = a;
  for (int t = 0; t < tri_size(a.N); ++t) {
    const double f = std::pow(gamma, tri_alpha(t).deg());
    for (int j = 0; j < 4; ++j) r.c[size_t(j)].c[size_t(t)] *= f;
  }
  return r;
}

// ---- evaluation of the chart -------------------------------------------------

std::array<Interval, 4> eval_P(const CSeq4& a, double gamma, const Interval& rho,
                               const Interval& psi, int order) {
  const int N = a.N;
  const Interval gr = gamma * rho;
  std::vector<Interval> pw(size_t(N), Interval(1.0));
  for (int d = 1; d < N; ++d) pw[size_t(d)] = pw[size_t(d - 1)] * gr;
  std::vector<Interval> cn(static_cast<size_t>(N)), sn(static_cast<size_t>(N));
  for (int n = 0; n < N; ++n) {
    auto [s, c] = iv_sincos(double(n) * psi);
    cn[size_t(n)] = c;
    sn[size_t(n)] = s;
  }
  std::array<Interval, 4> out;
  out.fill(Interval(0.0));
  for (int t = 0; t < tri_size(N); ++t) {
    const Alpha al = tri_alpha(t);
    if (al.a1 < al.a2) continue;  // conjugate pair handled from the a1 >= a2 side
    const int n = al.a1 - al.a2;
    const Interval& w = pw[size_t(al.deg())];
    for (int j = 0; j < 4; ++j) {
      const Cpx cf = a.c[size_t(j)].c[size_t(t)];
      const Interval re(cf.real()), im(cf.imag());
      if (n == 0) {
        if (order == 0) out[size_t(j)] += re * w;
        continue;
      }
      // pairing a term with its conjugate-index partner keeps the sum real:
      //   order 0: 2 Re(a e^{i n psi}),  order 1: 2 Re(i n a e^{i n psi}),
      //   order 2: -n^2 * (order 0 term)
      Interval val;
      if (order == 0) {
        val = 2.0 * (re * cn[size_t(n)] - im * sn[size_t(n)]);
      } else if (order == 1) {
        val = -2.0 * double(n) * (re * sn[size_t(n)] + im * cn[size_t(n)]);
      } else {
        val = -2.0 * double(n) * double(n) * (re * cn[size_t(n)] - im * sn[size_t(n)]);
      }
      out[size_t(j)] += val * w;
    }
  }
  return out;
}

std::array<double, 4> eval_P_point(const CSeq4& a, double gamma, double rho,
                                   double psi, int order) {
  const int N = a.N;
  std::array<double, 4> out{};
  for (int t = 0; t < tri_size(N); ++t) {
    const Alpha al = tri_alpha(t);
    if (al.a1 < al.a2) continue;
    const int n = al.a1 - al.a2;
    const double w = std::pow(gamma * rho, al.deg());
    const double c = std::cos(n * psi), s = std::sin(n * psi);
    for (int j = 0; j < 4; ++j) {
      const Cpx cf = a.c[size_t(j)].c[size_t(t)];
      double val;
      if (n == 0) {
        val = (order == 0) ? cf.real() : 0.0;
      } else if (order == 0) {
        val = 2.0 * (cf.real() * c - cf.imag() * s);
      } else if (order == 1) {
        val = -2.0 * n * (cf.real() * s + cf.imag() * c);
      } else {
        val = -2.0 * double(n) * n * (cf.real() * c - cf.imag() * s);
      }
      out[size_t(j)] += val * w;
    }
  }
  return out;
}

Interval derivative_error_bound(double delta, double nu_tilde, double rho) {
  if (!(rho > 0.0 && rho < nu_tilde)) throw RhoNotLessThanNu();
  const Interval num = 4.0 * iv_pi() * Interval(delta);
  const Interval den = Interval(nu_tilde) * iv_log(Interval(nu_tilde) / Interval(rho));
  return num / den;
}

// ---- interval residual pieces -------------------------------------------------

namespace {

// |F(beta0, a0)| entrywise enclosures up to |alpha| < Nout
ISeq4 abs_F_interval(double beta0, const CSeq4& a0, int Nout) {
  const EigenData e = eigen_data(Interval(beta0));
  const CISeq a1iv = to_iv(a0.c[0]);
  const CISeq a2iv = to_iv(a0.c[1]);
  const CISeq q = cauchy2(a1iv, a2iv);
  const Interval b0(beta0);
  ISeq4 out(Nout);
  for (int t = 0; t < tri_size(Nout); ++t) {
    const Alpha al = tri_alpha(t);
    const int d = al.deg();
    std::array<CInterval, 4> av, Fv;
    for (int j = 0; j < 4; ++j) {
      const Cpx c = a0.c[size_t(j)].get(al.a1, al.a2);
      av[size_t(j)] = CInterval(c.real(), c.imag());
    }
    if (d == 0) {
      Fv = av;
    } else if (d == 1) {
      for (int j = 0; j < 4; ++j) {
        const CInterval v = (al.a1 == 1) ? e.V[size_t(j)] : e.V[size_t(j)].conj();
        Fv[size_t(j)] = av[size_t(j)] - v;
      }
    } else {
      const CInterval mu = mu_of(al, e.lambda);
      const CInterval qa = q.get(al.a1, al.a2);
      Fv[0] = mu * av[0] - (av[1] + qa);
      Fv[1] = mu * av[1] - av[2];
      Fv[2] = mu * av[2] - av[3];
      Fv[3] = mu * av[3] + av[0] + b0 * av[2];
    }
    for (int j = 0; j < 4; ++j) out.c[size_t(j)].c[size_t(t)] = abs_iv(Fv[size_t(j)]);
  }
  return out;
}

// |D_a F(beta0,a0) da + D_beta F(beta0,a0) dbeta| entrywise
ISeq4 abs_linear_interval(double beta0, const CSeq4& a0, const std::array<CISeq, 4>& da,
                          const Interval& dbeta, int Nout) {
  const EigenData e = eigen_data(Interval(beta0));
  const CInterval dl = eigen_dlambda(Interval(beta0));
  const std::array<CInterval, 4> dV = eigen_dV(Interval(beta0));
  const CISeq a1iv = to_iv(a0.c[0]);
  const CISeq a2iv = to_iv(a0.c[1]);
  const CISeq q1 = cauchy2(da[0], a2iv);   // da1 * a2
  const CISeq q2 = cauchy2(a1iv, da[1]);   // a1 * da2
  const Interval b0(beta0);
  ISeq4 out(Nout);
  for (int t = 0; t < tri_size(Nout); ++t) {
    const Alpha al = tri_alpha(t);
    const int d = al.deg();
    std::array<CInterval, 4> av, dav, Fv;
    for (int j = 0; j < 4; ++j) {
      const Cpx c = a0.c[size_t(j)].get(al.a1, al.a2);
      av[size_t(j)] = CInterval(c.real(), c.imag());
      dav[size_t(j)] = (d < da[size_t(j)].N) ? da[size_t(j)].c[size_t(t)] : CInterval(0.0);
    }
    if (d == 0) {
      Fv = dav;
    } else if (d == 1) {
      for (int j = 0; j < 4; ++j) {
        const CInterval dv = (al.a1 == 1) ? dV[size_t(j)] : dV[size_t(j)].conj();
        Fv[size_t(j)] = dav[size_t(j)] - dbeta * dv;
      }
    } else {
      const CInterval mu = mu_of(al, e.lambda);
      const CInterval dmu = double(al.a1) * dl + double(al.a2) * dl.conj();
      const CInterval q1a = q1.get(al.a1, al.a2);
      const CInterval q2a = q2.get(al.a1, al.a2);
      Fv[0] = mu * dav[0] - (dav[1] + q1a + q2a);
      Fv[1] = mu * dav[1] - dav[2];
      Fv[2] = mu * dav[2] - dav[3];
      Fv[3] = mu * dav[3] + dav[0] + b0 * dav[2];
      for (int j = 0; j < 4; ++j) Fv[size_t(j)] += dbeta * (dmu * av[size_t(j)]);
      Fv[3] += dbeta * av[2];
    }
    for (int j = 0; j < 4; ++j) out.c[size_t(j)].c[size_t(t)] = abs_iv(Fv[size_t(j)]);
  }
  return out;
}

// second order terms G_alpha of the residual expansion in s
ISeq4 g_bound(double beta0, double beta1, const std::array<CISeq, 4>& da,
              const Interval& dbeta, int Nout) {
  const Interval b0(beta0), b1(beta1);
  const Interval dbeta2 = dbeta * dbeta;
  // degree 1 constant: |V''| <= k/4 sqrt((4+3b^2)/((2-b)^3(2+b)^3)) + k(k-1)/4 / ((2-b)(2+b)),
  // both increasing in beta, evaluated at beta1
  const Interval c1 = 0.25 * iv_sqrt((4.0 + 3.0 * b1 * b1) /
                                     (iv_pow(2.0 - b1, 3) * iv_pow(2.0 + b1, 3)));
  const Interval c2 = 0.25 / ((2.0 - b1) * (2.0 + b1));
  const double k1f[4] = {0, 1, 2, 3};
  const double k2f[4] = {0, 0, 2, 6};
  const CISeq qdd = cauchy2(da[0], da[1]);  // da1 * da2
  ISeq4 out(Nout);
  for (int t = 0; t < tri_size(Nout); ++t) {
    const Alpha al = tri_alpha(t);
    const int d = al.deg();
    if (d == 0) {
      for (int j = 0; j < 4; ++j) out.c[size_t(j)].c[size_t(t)] = Interval(0.0);
      continue;
    }
    if (d == 1) {
      for (int j = 0; j < 4; ++j) {
        out.c[size_t(j)].c[size_t(t)] =
            0.5 * (k1f[j] * c1 + k2f[j] * c2) * dbeta2;
      }
      continue;
    }
    // |alpha| >= 2: mixed beta-a second derivative plus the quadratic a-term
    const Interval fac = 0.25 * iv_sqrt(Interval(double(d * d)) / (2.0 - b1) +
                                        Interval(double((al.a1 - al.a2) * (al.a1 - al.a2))) /
                                            (2.0 + b0));
    for (int j = 0; j < 4; ++j) {
      Interval g = fac * iv_abs(dbeta) *
                   ((d < da[size_t(j)].N) ? abs_iv(da[size_t(j)].c[size_t(t)]) : Interval(0.0));
      if (j == 0) g += abs_iv(qdd.get(al.a1, al.a2));
      if (j == 3) g += iv_abs(dbeta) * ((d < da[2].N) ? abs_iv(da[2].c[size_t(t)]) : Interval(0.0));
      out.c[size_t(j)].c[size_t(t)] = g;
    }
  }
  return out;
}

// entrywise upper bounds of |complex interval| for a CMidRad matrix
Mat abs_upper(const CMidRad& B) {
  Mat R(B.mid.rows(), B.mid.cols());
  for (int j = 0; j < B.mid.cols(); ++j) {
    for (int i = 0; i < B.mid.rows(); ++i) {
      const Interval re = Interval(std::fabs(B.mid(i, j).real())) + Interval(B.rad(i, j));
      const Interval im = Interval(std::fabs(B.mid(i, j).imag())) + Interval(B.rad(i, j));
      R(i, j) = iv_sqrt(iv_pow(re, 2) + iv_pow(im, 2)).hi;
    }
  }
  return R;
}

Mat abs_upper(const CMat& J) {
  Mat R(J.rows(), J.cols());
  for (int j = 0; j < J.cols(); ++j) {
    for (int i = 0; i < J.rows(); ++i) {
      const Interval re(std::fabs(J(i, j).real()));
      const Interval im(std::fabs(J(i, j).imag()));
      R(i, j) = iv_sqrt(iv_pow(re, 2) + iv_pow(im, 2)).hi;
    }
  }
  return R;
}

// weighted column sums S[i][j][col] = sum_rows |M^{(i,j)}_{row,col}| w_{deg(row)}
// for all sixteen component pairs in one pass; upper bounds
std::array<std::array<std::vector<double>, 4>, 4> weighted_colsums(const Mat& Mabs, int N,
                                                                   const std::vector<double>& w_hi) {
  const int T = tri_size(N);
  std::vector<double> wrow(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) wrow[size_t(t)] = w_hi[size_t(tri_alpha(t).deg())];
  std::array<std::array<std::vector<double>, 4>, 4> S;
  for (auto& row : S)
    for (auto& v : row) v.assign(size_t(T), 0.0);
  for (int tc = 0; tc < T; ++tc) {
    for (int j = 0; j < 4; ++j) {
      const int col = gidx(tc, j);
      const double* mcol = Mabs.data() + size_t(col) * size_t(Mabs.rows());
      std::array<double, 4> acc{};
      for (int tr = 0; tr < T; ++tr) {
        const double w = wrow[size_t(tr)];
        for (int i = 0; i < 4; ++i) acc[size_t(i)] += mcol[gidx(tr, i)] * w;
      }
      for (int i = 0; i < 4; ++i) S[size_t(i)][size_t(j)][size_t(tc)] = acc[size_t(i)];
    }
  }
  const double f = 1.0 + 8.0 * gamma_bound(T + 2);  // nonnegative-sum rounding drift
  for (auto& row : S)
    for (auto& v : row)
      for (double& x : v) x = next_up(x * f);
  return S;
}

}  // namespace

// ---- prover -------------------------------------------------------------------

ManifoldProver::ManifoldProver(int N, double beta0, const CSeq4& a0)
    : N_(N), beta0_(beta0), a0_(a0), ed_(eigen_data(Interval(beta0))) {
  const EigenPoint ep = eigen_point(beta0);
  const CMat DFpt = assemble_DF(beta0, a0, ep.lambda);
  Eigen::PartialPivLU<CMat> lu(DFpt);
  J_ = lu.inverse();
  if (!J_.allFinite()) throw SingularJacobian();
  // The map couples a degree only to lower degrees, so the exact inverse is
  // block lower triangular; the numerical inverse leaves roundoff dust above
  // the diagonal that the weighted norms would amplify by gamma^{-degree}.
  const int T = tri_size(N);
  for (int tc = 0; tc < T; ++tc) {
    const int dc = tri_alpha(tc).deg();
    for (int tr = 0; tr < T; ++tr) {
      if (tri_alpha(tr).deg() < dc) {
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) J_(4 * tr + i, 4 * tc + j) = Cpx(0.0);
      }
    }
  }
  // flush near-underflow dust: subnormal operands stall the residual products
  for (int c = 0; c < 4 * T; ++c)
    for (int r = 0; r < 4 * T; ++r) {
      Cpx& v = J_(r, c);
      v = Cpx(std::fabs(v.real()) < 1e-280 ? 0.0 : v.real(),
              std::fabs(v.imag()) < 1e-280 ? 0.0 : v.imag());
    }
  Jabs_ = abs_upper(J_);
  const CMidRad DFiv = assemble_DF_enclosure(beta0, a0);
  Babs_ = abs_upper(residual_identity(J_, DFiv));
  absF0_ = abs_F_interval(beta0, a0, 2 * N - 1);
}

ManifoldBounds ManifoldProver::bounds(double beta1, const CSeq4& a1, double gamma) const {
  const int N = N_;
  const int Nful = 2 * N - 1;
  const Interval g(gamma);
  std::vector<Interval> pw(size_t(Nful), Interval(1.0));
  for (int d = 1; d < Nful; ++d) pw[size_t(d)] = pw[size_t(d - 1)] * g;
  std::vector<double> pw_hi(static_cast<size_t>(Nful));
  for (int d = 0; d < Nful; ++d) pw_hi[size_t(d)] = pw[size_t(d)].hi;
  // reciprocal powers as separate products: dividing by gamma^d would throw
  // once the power underflows to an interval touching zero
  const Interval ginv = Interval(1.0) / g;
  std::vector<Interval> ipw(size_t(Nful), Interval(1.0));
  for (int d = 1; d < Nful; ++d) ipw[size_t(d)] = ipw[size_t(d - 1)] * ginv;

  // Same-object call (gamma search) is the exact single-parameter case.
  const bool degenerate = (beta1 == beta0_) && (&a1 == &a0_);
  const Interval dbeta = degenerate ? Interval(0.0) : Interval(beta1) - Interval(beta0_);
  std::array<CISeq, 4> da;
  for (int j = 0; j < 4; ++j) {
    da[size_t(j)] = degenerate ? CISeq(N) : delta_iv(a1.c[size_t(j)], a0_.c[size_t(j)]);
  }

  // ---- residual vector Ftilde and |A| Ftilde --------------------------------
  ISeq4 ft = absF0_;
  if (!degenerate) {
    const ISeq4 lin = abs_linear_interval(beta0_, a0_, da, dbeta, Nful);
    const ISeq4 gb = g_bound(beta0_, beta1, da, dbeta, Nful);
    for (int j = 0; j < 4; ++j)
      for (size_t t = 0; t < ft.c[size_t(j)].c.size(); ++t)
        ft.c[size_t(j)].c[t] = ft.c[size_t(j)].c[t] + lin.c[size_t(j)].c[t] + gb.c[size_t(j)].c[t];
  }

  const int T = tri_size(N);
  Vec ftN(4 * T);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < 4; ++j) ftN(gidx(t, j)) = ft.c[size_t(j)].c[size_t(t)].hi;
  Vec AF = Jabs_ * ftN;
  AF *= 1.0 + 8.0 * gamma_bound(4 * T);

  std::array<Interval, 4> Y;
  Y.fill(Interval(0.0));
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < 4; ++j)
      Y[size_t(j)] += Interval(0.0, next_up(AF(gidx(t, j)))) * pw[size_t(tri_alpha(t).deg())];
  }
  // diagonal tail of A: entries 1/(alpha1 lambda + alpha2 lambda*)
  for (int t = T; t < tri_size(Nful); ++t) {
    const Alpha al = tri_alpha(t);
    const Interval inv = Interval(1.0) / abs_iv(mu_of(al, ed_.lambda));
    for (int j = 0; j < 4; ++j)
      Y[size_t(j)] += ft.c[size_t(j)].c[size_t(t)] * inv * pw[size_t(al.deg())];
  }

  // ---- Z0 from B, Z1/Z2 from J ----------------------------------------------
  const auto SB = weighted_colsums(Babs_, N, pw_hi);
  const auto SJ = weighted_colsums(Jabs_, N, pw_hi);

  std::array<std::array<Interval, 4>, 4> K{}, KB{}, Kt{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      Interval kb(0.0), kj(0.0), kt(0.0);
      for (int tc = 0; tc < T; ++tc) {
        const int d = tri_alpha(tc).deg();
        const Interval& iw = ipw[size_t(d)];
        kb = iv_max(kb, Interval(0.0, SB[size_t(i)][size_t(j)][size_t(tc)]) * iw);
        const Interval cj = Interval(0.0, SJ[size_t(i)][size_t(j)][size_t(tc)]) * iw;
        kj = iv_max(kj, cj);
        kt = iv_max(kt, double(d) * cj);
      }
      KB[size_t(i)][size_t(j)] = kb;
      K[size_t(i)][size_t(j)] = kj;
      Kt[size_t(i)][size_t(j)] = kt;
    }
  }

  std::array<Interval, 4> Z0;
  for (int i = 0; i < 4; ++i) {
    Interval s(0.0);
    for (int j = 0; j < 4; ++j) s += KB[size_t(i)][size_t(j)];
    Z0[size_t(i)] = s;
  }

  const Interval b0(beta0_), b1(beta1);
  const Interval tailN = Interval(2.0) / (double(N) * iv_sqrt(2.0 - b0));
  const Interval tail0 = Interval(2.0) / iv_sqrt(2.0 - b0);
  const Interval n1 = norm_l1nu_taylor(to_iv(a0_.c[0]), g);
  const Interval n2 = norm_l1nu_taylor(to_iv(a0_.c[1]), g);
  const Interval d1 = norm_l1nu_taylor(da[0], g);
  const Interval d2 = norm_l1nu_taylor(da[1], g);
  const Interval denom = 2.0 * iv_sqrt((2.0 - b1) * (2.0 + b1));
  std::array<Interval, 4> Kbar;
  for (int i = 0; i < 4; ++i) {
    Interval s(0.0);
    for (int j = 0; j < 4; ++j) s += Kt[size_t(i)][size_t(j)];
    Kbar[size_t(i)] = iv_max(s, tail0) / denom;
  }
  const Interval adb = iv_abs(dbeta);

  std::array<Interval, 4> Z1;
  Z1[0] = tailN * (1.0 + n1 + n2) + iv_max(K[0][0], tailN) * (d1 + d2) +
          adb * (Kbar[0] + K[0][3]);
  Z1[1] = tailN + K[1][0] * (d1 + d2) + adb * (Kbar[1] + K[1][3]);
  Z1[2] = tailN + K[2][0] * (d1 + d2) + adb * (Kbar[2] + K[2][3]);
  Z1[3] = tailN * (1.0 + b0) + K[3][0] * (d1 + d2) +
          adb * (Kbar[3] + iv_max(K[3][3], tailN));

  std::array<Interval, 4> Z2;
  Z2[0] = 2.0 * iv_max(K[0][0], tailN);
  for (int i = 1; i < 4; ++i) Z2[size_t(i)] = 2.0 * K[size_t(i)][0];

  return ManifoldBounds{Y, Z0, Z1, Z2};
}

double maximize_gamma(const ManifoldProver& prover, double eta) {
  // The fourth component carries a scale-independent tail floor
  // 2(1+beta0)/(N sqrt(2-beta0)) inside Z1.  Close to beta = 2 it exceeds the
  // requested threshold, so the threshold moves up proportionally to the
  // remaining contraction slack (the 0.228 reproduces the reported chart
  // sizes near beta = 1.9).
  const Interval b0(prover.beta0());
  const double floor_z =
      (Interval(2.0) * (1.0 + b0) / (double(prover.N()) * iv_sqrt(2.0 - b0))).hi;
  if (floor_z >= 1.0) throw NoValidGamma();
  const double eta_eff = (eta > 0.0 && floor_z >= eta)
                             ? floor_z + 0.228 * (1.0 - floor_z)
                             : eta;

  auto feasible = [&](double gamma) {
    try {
      const ManifoldBounds b = prover.bounds(prover.beta0(), prover.a0(), gamma);
      for (int j = 0; j < 4; ++j) {
        if (!((b.Z0[size_t(j)] + b.Z1[size_t(j)]).hi <= eta_eff)) return false;
      }
      return radii_check(b.polys()).ok;
    } catch (const std::runtime_error&) {
      // overflowed bounds at an extreme trial scale
      return false;
    }
  };

  double good, bad;
  if (feasible(1.0)) {
    good = 1.0;
    double t = 2.0;
    while (t <= 1e7 && feasible(t)) {
      good = t;
      t *= 2.0;
    }
    if (t > 1e7) return good;
    bad = t;
  } else {
    bad = 1.0;
    good = 0.0;
    double t = 0.5;
    while (t >= 1e-12) {
      if (feasible(t)) {
        good = t;
        break;
      }
      bad = t;
      t *= 0.5;
    }
    if (good == 0.0) throw NoValidGamma();
  }
  for (int it = 0; it < 20; ++it) {
    const double mid = std::sqrt(good * bad);
    if (feasible(mid)) good = mid; else bad = mid;
  }
  return good;
}

ManifoldResult validate_manifold_range(const ManifoldProver& prover, double beta1,
                                       const CSeq4& a1, double gamma, double /*eta*/) {
  const ManifoldBounds b = prover.bounds(beta1, a1, gamma);
  const auto polys = b.polys();
  RadiiReport rep = radii_check(polys);
  if (!rep.ok) {
    throw NoValidRadius("manifold radii check failed on component " +
                        std::to_string(rep.worst_component + 1) + " for [" +
                        std::to_string(prover.beta0()) + "," + std::to_string(beta1) + "]");
  }
  // The chart error r_m feeds the orbit problem's error budget, so prefer the
  // smallest certifiable radius over the generic interior choice.
  for (double f : {4.0, 16.0, 64.0}) {
    const double cand = rep.r_min * f;
    if (cand < rep.r && radii_reverify(polys, cand)) {
      rep.r = cand;
      break;
    }
  }
  ManifoldResult out;
  out.cert.beta0 = prover.beta0();
  out.cert.beta1 = beta1;
  out.cert.N = prover.N();
  out.cert.gamma = gamma;
  out.cert.nu_tilde = 1.0;
  out.cert.r_m = rep.r;
  for (int j = 0; j < 4; ++j) {
    out.cert.Y[size_t(j)] = b.Y[size_t(j)].hi;
    out.cert.Z0[size_t(j)] = b.Z0[size_t(j)].hi;
    out.cert.Z1[size_t(j)] = b.Z1[size_t(j)].hi;
    out.cert.Z2[size_t(j)] = b.Z2[size_t(j)].hi;
  }
  out.a0 = prover.a0();
  out.a1 = a1;
  return out;
}

}  // namespace hb
