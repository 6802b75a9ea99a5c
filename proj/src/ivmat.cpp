#include "hb/ivmat.hpp"

namespace hb {

namespace {

constexpr double kUnit = 0x1p-53;

// Inflate a nonnegative radius matrix so that its floating point assembly
// errors are absorbed: multiply by (1 + k*eps) upward and add an absolute
// guard against underflow in the products feeding it.
void inflate(Mat& rad, long terms) {
  const double f = 1.0 + 1024.0 * kUnit;
  const double guard = double(terms + 8) * 4.0 * std::numeric_limits<double>::denorm_min();
  rad = (rad * f).array() + guard;
  for (int j = 0; j < rad.cols(); ++j)
    for (int i = 0; i < rad.rows(); ++i) rad(i, j) = next_up(next_up(rad(i, j)));
}

}  // namespace

double gamma_bound(long n) {
  const double nu = double(n) * kUnit;
  return next_up(next_up(nu / (1.0 - nu)));
}

IvMat IvMat::from_point(const Mat& m) {
  IvMat r(int(m.rows()), int(m.cols()));
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < m.rows(); ++i) r(i, j) = Interval(m(i, j));
  return r;
}

// Zero-width entries get a tiny but normal radius: subnormal radii would put
// the whole radius product into hardware assist territory.
constexpr double kRadFloor = 1e-290;

MidRad to_midrad(const IvMat& a) {
  MidRad r;
  r.mid.resize(a.rows, a.cols);
  r.rad.resize(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) {
      const Interval& v = a(i, j);
      r.mid(i, j) = v.mid();
      // mid() rounds; cover both endpoints from the rounded midpoint
      const double d = std::max(next_up(r.mid(i, j) - v.lo), next_up(v.hi - r.mid(i, j)));
      r.rad(i, j) = std::max(next_up(d), kRadFloor);
    }
  return r;
}

CMidRad to_midrad(const CIvMat& a) {
  CMidRad r;
  r.mid.resize(a.rows, a.cols);
  r.rad.resize(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) {
      const CInterval& v = a(i, j);
      const double mr = v.re.mid(), mi = v.im.mid();
      r.mid(i, j) = std::complex<double>(mr, mi);
      const double dr = std::max(next_up(mr - v.re.lo), next_up(v.re.hi - mr));
      const double di = std::max(next_up(mi - v.im.lo), next_up(v.im.hi - mi));
      r.rad(i, j) = std::max(next_up(std::max(dr, di)), kRadFloor);
    }
  return r;
}

MidRad mul_enclose(const Mat& A, const MidRad& B) {
  const long n = A.cols();
  MidRad C;
  C.mid.noalias() = A * B.mid;
  const Mat Aabs = A.cwiseAbs();
  const Mat Babs = B.mid.cwiseAbs();
  Mat R1(A.rows(), B.mid.cols()), R2(A.rows(), B.mid.cols());
  R1.noalias() = Aabs * B.rad;
  R2.noalias() = Aabs * Babs;
  C.rad = R1 + gamma_bound(n + 2) * R2;
  inflate(C.rad, n);
  return C;
}

CMidRad mul_enclose(const CMat& A, const CMidRad& B) {
  const long n = A.cols();
  CMidRad C;
  C.mid.noalias() = A * B.mid;
  // |re|+|im| dominates the term magnitudes entering either component
  const Mat Aabs = A.real().cwiseAbs() + A.imag().cwiseAbs();
  const Mat Babs = B.mid.real().cwiseAbs() + B.mid.imag().cwiseAbs();
  Mat R1(A.rows(), B.mid.cols()), R2(A.rows(), B.mid.cols());
  R1.noalias() = Aabs * B.rad;
  R2.noalias() = Aabs * Babs;
  C.rad = R1 + gamma_bound(2 * n + 4) * R2;
  inflate(C.rad, 2 * n);
  return C;
}

MidRad residual_identity(const Mat& A, const MidRad& B) {
  MidRad C = mul_enclose(A, B);
  // subtracting the exact identity costs one more rounding per entry
  C.mid = Mat::Identity(C.mid.rows(), C.mid.cols()) - C.mid;
  for (int j = 0; j < C.rad.cols(); ++j)
    for (int i = 0; i < C.rad.rows(); ++i) {
      C.rad(i, j) = next_up(C.rad(i, j) + kUnit * std::fabs(C.mid(i, j)));
      C.rad(i, j) = next_up(C.rad(i, j));
    }
  return C;
}

CMidRad residual_identity(const CMat& A, const CMidRad& B) {
  CMidRad C = mul_enclose(A, B);
  C.mid = CMat::Identity(C.mid.rows(), C.mid.cols()) - C.mid;
  for (int j = 0; j < C.rad.cols(); ++j)
    for (int i = 0; i < C.rad.rows(); ++i) {
      const double m = std::abs(C.mid(i, j).real()) + std::abs(C.mid(i, j).imag());
      C.rad(i, j) = next_up(next_up(C.rad(i, j) + kUnit * m));
    }
  return C;
}

std::vector<Interval> mul(const IvMat& A, const std::vector<Interval>& x) {
  std::vector<Interval> y(size_t(A.rows));
  for (int i = 0; i < A.rows; ++i) {
    Interval acc(0.0);
    for (int j = 0; j < A.cols; ++j) acc += A(i, j) * x[size_t(j)];
    y[size_t(i)] = acc;
  }
  return y;
}

}  // namespace hb
