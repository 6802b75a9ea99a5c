#pragma once
// Projected boundary value problem for the symmetric homoclinic orbit in
// Chebyshev coefficient space.  The unknown is x = (L, psi, x1..x4) in
// R^2 x (l^1_nu)^4; the operator couples the rescaled flow v' = L Psi(v),
// the symmetry conditions at t = -1 and the boundary condition
// v(1) = P_beta(psi) on the validated local stable manifold chart.
// Residual (Y) and contraction (Z0..Z3) bounds produce cubic radii
// polynomials whose negativity certifies a family of orbits over
// [beta0, beta1].

#include <array>
#include <vector>

#include "hb/interval.hpp"
#include "hb/ivmat.hpp"
#include "hb/manifold.hpp"
#include "hb/radii.hpp"
#include "hb/seq.hpp"

namespace hb {

struct LogDomain : std::runtime_error {
  LogDomain() : std::runtime_error("log of non-positive argument in orbit reconstruction") {}
};

struct OrbitPoint {
  double L = 0.0;
  double psi = 0.0;
  std::array<std::vector<double>, 4> x;

  int m() const { return int(x[0].size()); }
};


// ---- residual evaluation and Newton (floating point) ------------------------

struct BvpResidual {
  double eta1 = 0.0, eta2 = 0.0;
  std::array<std::vector<double>, 4> f;  // entries k = 0..kmax-1
};

// Full operator at float data; Pval supplies P_beta(psi) for the k = 0 rows.
BvpResidual F_bvp(double beta, const OrbitPoint& x, const std::array<double, 4>& Pval,
                  int kmax);

// max(|eta1|, |eta2|, ||f^(i)||_{1,nu=1}) of the m-truncated residual
double bvp_residual_norm(double beta, const OrbitPoint& x, const std::array<double, 4>& Pval);

// Newton on the finite projection; the chart side (s = 0 or 1) fixes which
// endpoint coefficients evaluate P and dP/dpsi.
OrbitPoint newton_solve_bvp(double beta, int m, const CSeq4& chart_coeffs, double gamma,
                            double rho, const OrbitPoint& init);

// First guess from a backward integration off the manifold chart, sampled
// onto Chebyshev nodes.
OrbitPoint initial_orbit_guess(double beta, int m, const CSeq4& chart_coeffs, double gamma,
                               double rho);

// ---- pointwise evaluation ----------------------------------------------------

// Clenshaw evaluation of v^(i)(t) = x0 + 2 sum x_k T_k(t)
std::array<double, 4> eval_orbit(const OrbitPoint& x, double t);
// u = ln(1 + v1); the first component must stay above -1
double reconstruct_u(double v1);

struct DiagnosticsReport {
  double ode_residual = 0.0;     // sup over samples of |v' - L Psi_beta(v)|_inf
  double boundary_error = 0.0;   // |v(1) - P(psi)|_inf
  double sym_v2 = 0.0;           // |v2(-1)|
  double sym_v4 = 0.0;           // |v4(-1)|
};
DiagnosticsReport diagnostics(const OrbitPoint& x, double beta, const CSeq4& chart_coeffs,
                              double gamma, double rho, int samples = 64);

// ---- rigorous bounds ----------------------------------------------------------

struct BvpBounds {
  std::array<Interval, 6> Y, Z0, Z1, Z2, Z3;
  std::vector<RadiiPoly> polys() const {
    std::vector<RadiiPoly> p(6);
    for (int l = 0; l < 6; ++l) {
      p[size_t(l)] = {Y[size_t(l)], Z0[size_t(l)] + Z1[size_t(l)], Z2[size_t(l)], Z3[size_t(l)]};
    }
    return p;
  }
};

struct BvpCertificate {
  double beta0 = 0, beta1 = 0;
  int m = 0;
  double nu = 1.05, rho = 0.5;
  double r = 0.0;
  std::array<double, 6> Y{}, Z0{}, Z1{}, Z2{}, Z3{};
};

// Splitting F(beta_s, x_s) = S0 + s S1 + s^2 S2 + s^3 S3 (+ chart error):
// scalar parts for the two symmetry rows, sequences of length 2m for the rest.
struct BvpSCoeffs {
  std::array<std::array<Interval, 2>, 4> scalar;        // [power][eta row], powers 2,3 vanish
  std::array<std::array<std::vector<Interval>, 4>, 4> seq;  // [power][component][k]
};

// Holds the beta0-side state: the numerical inverse A of the Jacobian, the
// residual matrix B = I - A DF(beta0, x0), its operator norms, and the
// x0-dependent convolution estimates.  The beta1-side inputs (endpoint data
// x1, chart endpoint coefficients a1, validated chart radius r_m) vary per
// call, so parameter steps and retries with a shrunken beta1 reuse all of it.
class BvpProver {
 public:
  BvpProver(double beta0, const OrbitPoint& x0, const CSeq4& a0, int N_chart, double gamma,
            double nu, double rho);

  BvpSCoeffs s_coefficients(double beta1, const OrbitPoint& x1, const CSeq4& a1) const;
  BvpBounds bounds(double beta1, const OrbitPoint& x1, const CSeq4& a1, double r_m) const;

  const Mat& A() const { return A_; }
  double beta0() const { return beta0_; }
  const OrbitPoint& x0() const { return x0_; }
  const CSeq4& a0() const { return a0_; }
  double gamma() const { return gamma_; }
  double nu() const { return nu_; }
  double rho() const { return rho_; }

 private:
  double beta0_, nu_, rho_;
  OrbitPoint x0_;
  CSeq4 a0_;
  int N_;
  double gamma_;
  int m_;
  Mat A_;
  std::array<Interval, 6> Z0_;
  // block norms of A
  Interval Ascal_[2][2];
  Interval Adual_[2][4];   // ||A_{l,i}||_{inf,nu^-1}, l = 1,2; i = 3..6
  Interval Acol_[4][2];    // ||A_{l,i}||_{1,nu},    l = 3..6; i = 1,2
  Interval Aop_[4][4];     // ||A_{l,i}||_{B(l1nu)}, l,i = 3..6 (tail on diagonal)
  Interval Acol0_[4][4];   // l1nu norm of column 0 of A_{l,i}, l,i = 3..6
  // x0-only convolution machinery
  std::vector<Interval> c00_;                    // x0^(1) * x0^(2)
  std::array<std::vector<Interval>, 2> Qx0_, Qhx0_;  // Q_j, Qhat_j of x0^(1), x0^(2)
};

struct BvpResult {
  BvpCertificate cert;
  OrbitPoint x0, x1;
};

BvpResult validate_bvp_range(const BvpProver& prover, double beta1, const OrbitPoint& x1,
                             const CSeq4& a1, double r_m);

}  // namespace hb
