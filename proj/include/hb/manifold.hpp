#pragma once
// Parameterization of the two dimensional local stable manifold of the
// origin for v' = Psi_beta(v), where
//   Psi_beta(v) = (v2 + v1 v2, v3, v4, -beta v3 - v1),
// as a two-index power series with coefficients in C^4, together with the
// rigorous validation machinery: residual (Y) and contraction (Z0, Z1, Z2)
// bounds for the Newton-like operator over a parameter interval
// [beta0, beta1], and the domain rescaling by gamma.
//
// Rescaling convention: coefficients are stored unscaled; a chart rescaled by
// gamma (domain |theta| <= 1) has coefficients gamma^{|alpha|} a_alpha, and
// all bounds for it are obtained exactly from the unscaled data by running
// the weighted norms with weight gamma.  This identity is exact, so no
// rescaled copy is ever rounded.

#include <array>
#include <complex>
#include <memory>
#include <vector>

#include "hb/interval.hpp"
#include "hb/ivmat.hpp"
#include "hb/radii.hpp"
#include "hb/seq.hpp"

namespace hb {

struct BetaOutOfRange : std::runtime_error {
  BetaOutOfRange() : std::runtime_error("beta must lie in [0,2)") {}
};
struct NewtonDiverged : std::runtime_error {
  explicit NewtonDiverged(const std::string& w) : std::runtime_error(w) {}
};
struct SingularJacobian : std::runtime_error {
  SingularJacobian() : std::runtime_error("approximate Jacobian numerically singular") {}
};
struct NoValidGamma : std::runtime_error {
  NoValidGamma() : std::runtime_error("no rescaling gamma admits a validated chart") {}
};
struct RhoNotLessThanNu : std::runtime_error {
  RhoNotLessThanNu() : std::runtime_error("evaluation radius must satisfy rho < nu") {}
};

using Cpx = std::complex<double>;

// 4-vector of two-index sequences (components of the parameterization)
struct CSeq4 {
  int N = 0;
  std::array<Taylor2<Cpx>, 4> c;

  CSeq4() = default;
  explicit CSeq4(int n) : N(n) { c.fill(Taylor2<Cpx>(n)); }
};

// eigenpair at the origin: lambda = -sqrt(2-beta)/2 + i sqrt(2+beta)/2,
// V = (1, lambda, lambda^2, lambda^3)
struct EigenData {
  Interval beta;
  CInterval lambda;
  std::array<CInterval, 4> V;
};
EigenData eigen_data(const Interval& beta);

// d lambda / d beta and d V / d beta enclosures
CInterval eigen_dlambda(const Interval& beta);
std::array<CInterval, 4> eigen_dV(const Interval& beta);

// float eigen data for Newton paths
struct EigenPoint {
  Cpx lambda;
  std::array<Cpx, 4> V;
};
EigenPoint eigen_point(double beta);

// ---- the zero finding map F ------------------------------------------------

// F(beta, a) evaluated to all |alpha| < Nout (floating point)
CSeq4 F_manifold(double beta, const CSeq4& a, int Nout);
// componentwise interval enclosure of |F| at exact float data (used by Y)
struct ISeq4 {
  int N = 0;
  std::array<Taylor2<Interval>, 4> c;
  ISeq4() = default;
  explicit ISeq4(int n) : N(n) { c.fill(Taylor2<Interval>(n)); }
};

// exact triangular solve of F^[N](beta, .) = 0 degree by degree
CSeq4 recursive_solve(double beta, int N);
// Newton iteration on the truncated map; init defaults to the degree-1 data
CSeq4 newton_solve_manifold(double beta, int N, const CSeq4* init = nullptr);
// conjugate symmetry projection a_{(a2,a1)} := conj(a_{(a1,a2)})
void symmetrize(CSeq4& a);

// gamma^{|alpha|} a_alpha (also used on eigenvector data through degree 1)
CSeq4 rescale(const CSeq4& a, double gamma);

// float residual norm max_j ||F^(j)||_{1,1} of the truncated map
double residual_norm(double beta, const CSeq4& a);

// ---- evaluation ------------------------------------------------------------

// Enclosure of the real chart P(psi) = sum_alpha a_alpha (gamma rho)^{|alpha|}
// e^{i psi (alpha1-alpha2)} or its psi-derivatives (order 0, 1, 2).
// Requires conjugate-symmetric coefficients; the result is then real.
std::array<Interval, 4> eval_P(const CSeq4& a, double gamma, const Interval& rho,
                               const Interval& psi, int order);
// float midpoint version for Newton paths
std::array<double, 4> eval_P_point(const CSeq4& a, double gamma, double rho,
                                   double psi, int order);

// Lemma bounding |d h / d theta_i| on D_{2,rho} by 4 pi delta / (nu ln(nu/rho))
Interval derivative_error_bound(double delta, double nu_tilde, double rho);

// ---- bounds and validation --------------------------------------------------

struct ManifoldBounds {
  std::array<Interval, 4> Y, Z0, Z1, Z2;
  std::vector<RadiiPoly> polys() const {
    std::vector<RadiiPoly> p(4);
    for (int j = 0; j < 4; ++j) p[size_t(j)] = {Y[size_t(j)], Z0[size_t(j)] + Z1[size_t(j)], Z2[size_t(j)], Interval(0.0)};
    return p;
  }
};

struct ManifoldCertificate {
  double beta0 = 0, beta1 = 0;
  int N = 0;
  double gamma = 1.0;
  double nu_tilde = 1.0;  // domain radius of the rescaled chart
  double r_m = 0.0;
  std::array<double, 4> Y{}, Z0{}, Z1{}, Z2{};
};

// Holds the beta0-side heavy state (approximate inverse J and the residual
// matrix B = I - J DF) so that bounds for shrinking parameter steps and for
// the gamma search are cheap re-assemblies.
class ManifoldProver {
 public:
  ManifoldProver(int N, double beta0, const CSeq4& a0);

  ManifoldBounds bounds(double beta1, const CSeq4& a1, double gamma) const;

  const CMat& J() const { return J_; }
  const CSeq4& a0() const { return a0_; }
  double beta0() const { return beta0_; }
  int N() const { return N_; }

 private:
  int N_;
  double beta0_;
  CSeq4 a0_;
  EigenData ed_;           // at point interval beta0
  CMat J_;                 // approximate inverse of D_a F^[N](beta0, a0)
  Mat Jabs_;               // entrywise upper bounds of |J|
  Mat Babs_;               // entrywise upper bounds of |I - J DF|
  ISeq4 absF0_;            // |F(beta0, a0)| enclosures up to degree 2N-2
};

// Largest gamma (geometric bisection, 20 iterations) for which the single
// parameter proof succeeds with linear radii coefficient Z0+Z1 <= eta.
double maximize_gamma(const ManifoldProver& prover, double eta);

struct ManifoldResult {
  ManifoldCertificate cert;
  CSeq4 a0, a1;
};

// Validate the chart family over [beta0, beta1] at fixed gamma; data at the
// endpoints must already solve the truncated problems.
ManifoldResult validate_manifold_range(const ManifoldProver& prover, double beta1,
                                       const CSeq4& a1, double gamma, double eta);

}  // namespace hb
