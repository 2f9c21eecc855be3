#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "twistray/errors.hpp"
#include "twistray/types.hpp"

namespace twistray {

/// Phase point z = (x, y, theta) together with a matrix payload carried
/// along the same trajectory (0 x 0 when only the flow is wanted).
struct OdeState {
  Eigen::Vector3d z = Eigen::Vector3d::Zero();
  Mat p;

  PhaseState phase() const { return {z(0), z(1), z(2)}; }
};

inline OdeState make_state(const PhaseState& s, Mat payload = Mat()) {
  return {Eigen::Vector3d(s.x, s.y, s.theta), std::move(payload)};
}

/// Classical fourth-order Runge-Kutta step. rhs(state, out) writes the
/// derivative into out, which has the payload shape already.
template <typename Rhs>
OdeState rk4_step(const Rhs& rhs, const OdeState& s, double h) {
  OdeState k1 = s, k2 = s, k3 = s, k4 = s, tmp = s;
  rhs(s, k1);
  tmp.z = s.z + 0.5 * h * k1.z;
  tmp.p = s.p + cplx(0.5 * h) * k1.p;
  rhs(tmp, k2);
  tmp.z = s.z + 0.5 * h * k2.z;
  tmp.p = s.p + cplx(0.5 * h) * k2.p;
  rhs(tmp, k3);
  tmp.z = s.z + h * k3.z;
  tmp.p = s.p + cplx(h) * k3.p;
  rhs(tmp, k4);
  OdeState out;
  out.z = s.z + (h / 6.0) * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
  out.p = s.p + cplx(h / 6.0) * (k1.p + cplx(2.0) * k2.p + cplx(2.0) * k3.p + k4.p);
  return out;
}

inline double disk_rho(const OdeState& s, double radius) {
  return radius * radius - s.z(0) * s.z(0) - s.z(1) * s.z(1);
}

/// Tolerance on rho for locating the boundary crossing.
inline constexpr double kBoundaryTol = 1e-12;

struct ExitResult {
  OdeState state;
  double t = 0.0;
  bool exited = false;
};

/// Fixed-step integration from s0 until rho < 0 or t reaches cap. The
/// crossing step is refined by bisection on the substep length until
/// |rho| < kBoundaryTol. observe(t, state) sees every accepted state,
/// including the initial and terminal ones.
template <typename Rhs, typename Observer>
ExitResult integrate_to_exit(const Rhs& rhs, OdeState s, double h, double cap, double radius,
                             Observer&& observe) {
  double t = 0.0;
  observe(t, s);
  while (t < cap) {
    OdeState next = rk4_step(rhs, s, h);
    if (disk_rho(next, radius) >= 0.0) {
      s = std::move(next);
      t += h;
      observe(t, s);
      continue;
    }
    double lo = 0.0, hi = h;
    OdeState hit = next;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      hit = rk4_step(rhs, s, mid);
      const double r = disk_rho(hit, radius);
      if (std::abs(r) < kBoundaryTol) {
        lo = hi = mid;
        break;
      }
      if (r > 0.0)
        lo = mid;
      else
        hi = mid;
      if (hi - lo < 1e-17) break;
    }
    t += 0.5 * (lo + hi);
    observe(t, hit);
    return {std::move(hit), t, true};
  }
  return {std::move(s), t, false};
}

template <typename Rhs>
ExitResult integrate_to_exit(const Rhs& rhs, OdeState s, double h, double cap, double radius) {
  return integrate_to_exit(rhs, std::move(s), h, cap, radius, [](double, const OdeState&) {});
}

/// Integrates exactly duration t >= 0 using ceil(t/h) equal steps. Throws
/// LeftManifold when the orbit leaves the disk of the given radius first.
template <typename Rhs, typename Observer>
OdeState integrate_for(const Rhs& rhs, OdeState s, double t, double h, double radius,
                       Observer&& observe) {
  const int n = std::max(1, static_cast<int>(std::ceil(t / h - 1e-9)));
  const double step = t / n;
  const double slack = 1e-9 * radius * radius;
  observe(0, s);
  for (int i = 0; i < n; ++i) {
    s = rk4_step(rhs, s, step);
    if (disk_rho(s, radius) < -slack)
      throw LeftManifold("orbit left the disk at t = " + std::to_string((i + 1) * step) +
                         " before reaching " + std::to_string(t));
    observe(i + 1, s);
  }
  return s;
}

template <typename Rhs>
OdeState integrate_for(const Rhs& rhs, OdeState s, double t, double h, double radius) {
  return integrate_for(rhs, std::move(s), t, h, radius, [](int, const OdeState&) {});
}

}  // namespace twistray
