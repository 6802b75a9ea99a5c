#pragma once
// Interval matrices.  Small matrices use entrywise interval arithmetic; the
// large residual products I - J*DF are computed through midpoint-radius
// enclosures backed by BLAS-style floating point products plus an a priori
// rounding-error bound (|fl(x.y) - x.y| <= gamma_n * sum|x_i y_i| for any
// summation order, FMA included), so no rounding-mode switching is needed.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "hb/interval.hpp"

namespace hb {

using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

// Dense interval matrix stored entrywise (for assembly and small products).
struct IvMat {
  int rows = 0, cols = 0;
  std::vector<Interval> e;

  IvMat() = default;
  IvMat(int r, int c) : rows(r), cols(c), e(size_t(r) * c) {}
  Interval& operator()(int i, int j) { return e[size_t(i) * cols + j]; }
  const Interval& operator()(int i, int j) const { return e[size_t(i) * cols + j]; }

  static IvMat from_point(const Mat& m);
};

struct CIvMat {
  int rows = 0, cols = 0;
  std::vector<CInterval> e;

  CIvMat() = default;
  CIvMat(int r, int c) : rows(r), cols(c), e(size_t(r) * c) {}
  CInterval& operator()(int i, int j) { return e[size_t(i) * cols + j]; }
  const CInterval& operator()(int i, int j) const { return e[size_t(i) * cols + j]; }
};

// Midpoint-radius representation; the true matrix is entrywise within
// mid +- rad.  For the complex variant the radius bounds the real and the
// imaginary deviation separately.
struct MidRad {
  Mat mid, rad;
  Interval at(int i, int j) const {
    return Interval(next_down(mid(i, j) - rad(i, j)), next_up(mid(i, j) + rad(i, j)));
  }
};
struct CMidRad {
  CMat mid;
  Mat rad;
  CInterval at(int i, int j) const {
    const std::complex<double> m = mid(i, j);
    const double r = rad(i, j);
    return CInterval(Interval(next_down(m.real() - r), next_up(m.real() + r)),
                     Interval(next_down(m.imag() - r), next_up(m.imag() + r)));
  }
};

MidRad to_midrad(const IvMat& a);
CMidRad to_midrad(const CIvMat& a);

// gamma_n = n*u/(1-n*u): relative rounding budget of an n-term floating point
// sum of products under any summation order
double gamma_bound(long n);

// Rigorous enclosure of A*B for exact floating point A.
MidRad mul_enclose(const Mat& A, const MidRad& B);
CMidRad mul_enclose(const CMat& A, const CMidRad& B);

// Rigorous enclosure of I - A*B.
MidRad residual_identity(const Mat& A, const MidRad& B);
CMidRad residual_identity(const CMat& A, const CMidRad& B);

// Entrywise interval mat-vec (small sizes / reference path).
std::vector<Interval> mul(const IvMat& A, const std::vector<Interval>& x);

}  // namespace hb
