#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace twistray {

using cplx = std::complex<double>;

/// Largest matrix dimension carried by fields and ODE payloads. Bounded
/// storage keeps the per-step arithmetic allocation free; 9 covers the
/// endomorphism bundle of a rank-3 pair.
inline constexpr int kMaxDim = 9;

template <typename Scalar>
using BoundedMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic,
                                    Eigen::ColMajor, kMaxDim, kMaxDim>;

using Mat = BoundedMatrix<cplx>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PlanePoint {
  double x = 0.0;
  double y = 0.0;
};

/// A point of the unit circle bundle in the conformal chart. The attached
/// unit vector is v = e^{-phi(x,y)} (cos theta, sin theta).
struct PhaseState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  PlanePoint base() const { return {x, y}; }
};

/// Maps an angle into [0, 2pi).
inline double wrap_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

inline PhaseState normalized(PhaseState s) {
  s.theta = wrap_angle(s.theta);
  return s;
}

inline Mat identity(int n) { return Mat::Identity(n, n); }

}  // namespace twistray
