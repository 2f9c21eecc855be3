#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "twistray/errors.hpp"
#include "twistray/flow.hpp"
#include "twistray/geometry.hpp"

using namespace twistray;
using twistray::testing::Gen;
using twistray::testing::cpoly;
using twistray::testing::poly;

namespace {

// Independent curvature oracle: Laplacian of phi by five-point finite
// differences of phi values.
double curvature_fd(const ConformalSurface& s, double x, double y) {
  const double h = 1e-4;
  auto f = [&](double a, double b) { return s.phi_value(a, b); };
  const double lap = (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4 * f(x, y)) / (h * h);
  return -std::exp(-2 * f(x, y)) * lap;
}

// Geodesic curvature of the boundary circle t -> r(cos t, sin t) under
// g = e^{2 phi}|dx|^2, from Christoffel symbols with phi gradients taken
// by central differences.
double boundary_curvature_oracle(const ConformalSurface& s, double t) {
  const double r = s.radius(), h = 1e-6;
  const double x = r * std::cos(t), y = r * std::sin(t);
  const double phi = s.phi_value(x, y);
  const double px = (s.phi_value(x + h, y) - s.phi_value(x - h, y)) / (2 * h);
  const double py = (s.phi_value(x, y + h) - s.phi_value(x, y - h)) / (2 * h);
  const double dx = -r * std::sin(t), dy = r * std::cos(t);
  const double ddx = -r * std::cos(t), ddy = -r * std::sin(t);
  // Gamma^x_xx = px, Gamma^x_xy = py, Gamma^x_yy = -px;
  // Gamma^y_xx = -py, Gamma^y_xy = px, Gamma^y_yy = py.
  const double ax = ddx + px * dx * dx + 2 * py * dx * dy - px * dy * dy;
  const double ay = ddy - py * dx * dx + 2 * px * dx * dy + py * dy * dy;
  const double e2 = std::exp(2 * phi);
  const double nx = -std::exp(-phi) * std::cos(t), ny = -std::exp(-phi) * std::sin(t);
  const double speed2 = e2 * (dx * dx + dy * dy);
  return e2 * (ax * nx + ay * ny) / speed2;
}

}  // namespace

TEST_CASE("gaussian curvature examples") {
  CHECK(gaussian_curvature(ConformalSurface::flat(), {0.3, 0.1}) == 0.0);
  for (double c : {0.1, -0.25, 0.4}) {
    ConformalSurface s(poly({{2, 0, c}, {0, 2, c}}), 1.0);
    CHECK(gaussian_curvature(s, {0, 0}) == doctest::Approx(-4 * c).epsilon(1e-14));
  }
  ConformalSurface lin(poly({{1, 0, 0.1}}), 1.0);
  CHECK(gaussian_curvature(lin, {0, 0}) == 0.0);
}

TEST_CASE("gaussian curvature matches finite-difference Laplacian") {
  Gen g(11);
  for (int trial = 0; trial < 5; ++trial) {
    ConformalSurface s(g.real_poly(3, 0.3), 1.0);
    for (int i = 0; i < 20; ++i) {
      const PlanePoint p = g.point_in_disk(0.9);
      CHECK(gaussian_curvature(s, p) == doctest::Approx(curvature_fd(s, p.x, p.y)).epsilon(1e-5));
    }
  }
}

TEST_CASE("frame_apply examples") {
  const ConformalSurface flat = ConformalSurface::flat();
  const auto u_x = separable_test_function(cpoly({{1, 0, 1.0}}), angular::exp_mode(0));
  CHECK(std::abs(frame_apply(flat, FrameVector::X, u_x, {0, 0, 0}) - cplx(1.0)) < 1e-15);

  Gen g(3);
  ConformalSurface curved(g.real_poly(2, 0.3), 1.0);
  const auto base_only = separable_test_function(g.matrix_poly(1, 1, 3, 1.0), angular::exp_mode(0));
  for (const auto& s : g.states(20, 0.9))
    CHECK(std::abs(frame_apply(curved, FrameVector::V, base_only, s)) == 0.0);

  // u = theta on the flat disk: X u = 0, and theta is constant along the
  // integrated geodesic flow.
  const auto u_theta = separable_test_function(cpoly({{0, 0, 1.0}}), angular::linear());
  const TwistedDisk disk{flat, LambdaField()};
  for (const auto& s : g.states(10, 0.5)) {
    CHECK(std::abs(frame_apply(flat, FrameVector::X, u_theta, s)) < 1e-15);
    const PhaseState a = flow_state(disk, s, 1e-3), b = flow_state(disk, s, -1e-3);
    CHECK(std::abs(wrap_angle(a.theta - b.theta + kPi) - kPi) / 2e-3 < 1e-10);
  }
}

TEST_CASE("frame_apply agrees with finite differences along coordinate lines") {
  Gen g(5);
  ConformalSurface s(poly({{1, 0, 0.2}, {0, 2, 0.1}}), 1.0);
  const auto u = separable_test_function(g.matrix_poly(1, 1, 3, 1.0), angular::exp_mode(2));
  for (const auto& st : g.states(20, 0.8)) {
    const FrameCoefficients f = frame_coefficients(s, FrameVector::X, st);
    const double h = 1e-6;
    const PhaseState p{st.x + h * f.coeff(0), st.y + h * f.coeff(1), st.theta + h * f.coeff(2)};
    const PhaseState m{st.x - h * f.coeff(0), st.y - h * f.coeff(1), st.theta - h * f.coeff(2)};
    const cplx fd = (u(p).value - u(m).value) / (2 * h);
    CHECK(std::abs(fd - frame_apply(s, FrameVector::X, u, st)) < 1e-7);
  }
}

TEST_CASE("structure equations examples") {
  Gen g(7);
  const auto samples = g.states(100, 0.95);
  const auto u1 = separable_test_function(cpoly({{1, 0, 1.0}}), angular::sin_mode(1));
  CHECK(check_structure_equations(ConformalSurface::flat(), u1, samples).max() < 1e-12);

  ConformalSurface s(poly({{1, 0, 0.2}, {0, 2, 0.1}}), 1.0);
  const auto u2 = separable_test_function(cpoly({{0, 1, 1.0}}), angular::cos_mode(1));
  CHECK(check_structure_equations(s, u2, samples).max() < 1e-10);

  const auto u3 = separable_test_function(cpoly({{0, 0, 2.5}}), angular::exp_mode(0));
  const auto r = check_structure_equations(s, u3, samples);
  CHECK(r.x_v == 0.0);
  CHECK(r.xperp_v == 0.0);
  CHECK(r.x_xperp == 0.0);
}

TEST_CASE("structure equations hold on random surfaces and test functions") {
  Gen g(2024);
  for (int surf = 0; surf < 6; ++surf) {
    ConformalSurface s(g.real_poly(3, 0.4), 1.0);
    const auto samples = g.states(100, 0.95);
    for (int k : {-2, 0, 1, 3}) {
      const auto u = separable_test_function(g.matrix_poly(1, 1, 4, 1.0), angular::exp_mode(k));
      CHECK(check_structure_equations(s, u, samples).max() < 1e-10);
    }
  }
}

TEST_CASE("frame is Sasaki orthonormal and positively oriented") {
  Gen g(99);
  for (int surf = 0; surf < 5; ++surf) {
    ConformalSurface s(g.real_poly(3, 0.4), 1.0);
    for (const auto& st : g.states(50, 0.95)) {
      const Eigen::Vector3d x = frame_coefficients(s, FrameVector::X, st).coeff;
      const Eigen::Vector3d p = -frame_coefficients(s, FrameVector::Xperp, st).coeff;
      const Eigen::Vector3d v = frame_coefficients(s, FrameVector::V, st).coeff;
      CHECK(std::abs(sasaki_inner(s, st, x, x) - 1) < 1e-12);
      CHECK(std::abs(sasaki_inner(s, st, p, p) - 1) < 1e-12);
      CHECK(std::abs(sasaki_inner(s, st, v, v) - 1) < 1e-12);
      CHECK(std::abs(sasaki_inner(s, st, x, p)) < 1e-12);
      CHECK(std::abs(sasaki_inner(s, st, x, v)) < 1e-12);
      CHECK(std::abs(sasaki_inner(s, st, p, v)) < 1e-12);
      Eigen::Matrix3d m;
      m << x, p, v;
      CHECK(m.determinant() > 0);
    }
  }
}

TEST_CASE("polynomial partials match central differences") {
  Gen g(1234);
  const double h = 1e-5;
  for (int i = 0; i < 1000; ++i) {
    const auto p = g.real_poly(4, 1.0);
    const PlanePoint q = g.point_in_disk(1.2);
    const auto j = p.jet(q.x, q.y);
    auto val = [&](double x, double y) { return p.value(x, y)(0, 0); };
    const double fx = (val(q.x + h, q.y) - val(q.x - h, q.y)) / (2 * h);
    const double fy = (val(q.x, q.y + h) - val(q.x, q.y - h)) / (2 * h);
    const double fxx = (p.diff_x().value(q.x + h, q.y)(0, 0) - p.diff_x().value(q.x - h, q.y)(0, 0)) / (2 * h);
    const double fxy = (p.diff_x().value(q.x, q.y + h)(0, 0) - p.diff_x().value(q.x, q.y - h)(0, 0)) / (2 * h);
    const double fyy = (p.diff_y().value(q.x, q.y + h)(0, 0) - p.diff_y().value(q.x, q.y - h)(0, 0)) / (2 * h);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    CHECK(rel(fx, j.dx(0, 0)) < 1e-7);
    CHECK(rel(fy, j.dy(0, 0)) < 1e-7);
    CHECK(rel(fxx, j.dxx(0, 0)) < 1e-7);
    CHECK(rel(fxy, j.dxy(0, 0)) < 1e-7);
    CHECK(rel(fyy, j.dyy(0, 0)) < 1e-7);
  }
}

TEST_CASE("second fundamental form") {
  for (double r : {0.5, 1.0, 2.0, 3.5}) {
    const ConformalSurface s = ConformalSurface::flat(r);
    for (int j = 0; j < 16; ++j) {
      const double b = kTwoPi * j / 16;
      CHECK(second_fundamental_form(s, {r * std::cos(b), r * std::sin(b)}, b + kPi / 2) ==
            doctest::Approx(1.0 / r).epsilon(1e-14));
    }
  }
  ConformalSurface lin(poly({{1, 0, 0.1}}), 1.0);
  const double pi_b = second_fundamental_form(lin, {1.0, 0.0}, kPi / 2);
  CHECK(pi_b == doctest::Approx(boundary_curvature_oracle(lin, 0.0)).epsilon(1e-8));
  CHECK(pi_b == doctest::Approx(0.9953211598395556).epsilon(1e-14));

  Gen g(8);
  for (int trial = 0; trial < 5; ++trial) {
    ConformalSurface s(g.real_poly(3, 0.3), 1.3);
    for (int j = 0; j < 8; ++j) {
      const double t = g.uniform(0, kTwoPi);
      const PlanePoint b{1.3 * std::cos(t), 1.3 * std::sin(t)};
      CHECK(second_fundamental_form(s, b, t + kPi / 2) ==
            doctest::Approx(boundary_curvature_oracle(s, t)).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(second_fundamental_form(ConformalSurface::flat(), {0.5, 0.0}, 0.0), OffBoundary);
}

TEST_CASE("strict lambda-convexity margins") {
  const ConformalSurface flat = ConformalSurface::flat();
  CHECK(strict_lambda_convexity_report(flat, LambdaField(), 16).min_margin ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(strict_lambda_convexity_report(flat, LambdaField::constant(0.5), 16).min_margin ==
        doctest::Approx(0.5).epsilon(1e-14));
  const auto bad = strict_lambda_convexity_report(flat, LambdaField::constant(1.5), 16);
  CHECK(bad.min_margin == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK_FALSE(bad.convex());
  CHECK_THROWS(strict_lambda_convexity_report(flat, LambdaField(), 4));
}

TEST_CASE("lambda field reversal and reality") {
  Gen g(4);
  const LambdaField lam = LambdaField::thermostat(g.matrix_poly(1, 1, 2, 0.5));
  CHECK(lam.is_thermostat());
  CHECK(lam.degree() == 1);
  std::vector<PlanePoint> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(g.point_in_disk(1.0));
  CHECK(lam.reality_defect(pts) < 1e-15);
  const LambdaField rev = lam.reversed();
  for (const auto& s : g.states(20, 1.0))
    CHECK(rev.value(s.x, s.y, s.theta) ==
          doctest::Approx(-lam.value(s.x, s.y, s.theta + kPi)).epsilon(1e-13));
}
