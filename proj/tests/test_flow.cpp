#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "twistray/errors.hpp"
#include "twistray/flow.hpp"

using namespace twistray;
using twistray::testing::Gen;
using twistray::testing::cpoly;
using twistray::testing::poly;

namespace {

const TwistedDisk kFlat{ConformalSurface::flat(), LambdaField()};

TwistedDisk magnetic(double b) { return {ConformalSurface::flat(), LambdaField::constant(b)}; }

TwistedDisk thermostat_disk() {
  return {ConformalSurface(poly({{2, 0, 0.1}, {0, 2, 0.1}}), 1.0),
          LambdaField::thermostat(cpoly({{0, 0, cplx(0.2, 0.1)}, {1, 0, cplx(0.1, 0.0)}}))};
}

// Exit time of a constant-curvature arc in the flat unit disk, from the
// circle-intersection quadratic: the arc has center c = x + i v / b and
// radius 1/b; it meets |z| = 1 where |c + e^{i psi}/b| = 1.
double arc_exit_oracle(double b, const PhaseState& s) {
  const double cx = s.x - std::sin(s.theta) / b, cy = s.y + std::cos(s.theta) / b;
  const double rr = 1.0 / b;
  // Point on arc at time t: c + rr * (sin(theta + b t), -cos(theta + b t)).
  // |.|^2 = |c|^2 + rr^2 + 2 rr (cx sin - cy cos) = 1.
  const double c2 = cx * cx + cy * cy;
  const double k = (1.0 - c2 - rr * rr) / (2 * rr);
  const double amp = std::hypot(cx, cy);
  const double ph = std::atan2(-cy, cx);  // cx sin a - cy cos a = amp sin(a + ph)
  // sin(a + ph) = k / amp; find the smallest t > 0 solving it.
  const double base = std::asin(k / amp);
  double best = 1e9;
  for (int n = -3; n <= 3; ++n)
    for (double a : {base - ph + kTwoPi * n, kPi - base - ph + kTwoPi * n}) {
      const double t = (a - s.theta) / b;
      if (t > 1e-9 && t < best) best = t;
    }
  return best;
}

}  // namespace

TEST_CASE("generator_rhs examples") {
  CHECK((generator_rhs(kFlat, {0, 0, 0}) - Eigen::Vector3d(1, 0, 0)).norm() == 0.0);
  CHECK((generator_rhs(magnetic(1.0), {0, 0, 0}) - Eigen::Vector3d(1, 0, 1)).norm() == 0.0);
  const TwistedDisk tilt{ConformalSurface(poly({{0, 1, 0.3}}), 1.0), LambdaField()};
  CHECK((generator_rhs(tilt, {0, 0, 0}) - Eigen::Vector3d(1, 0, 0.3)).norm() < 1e-15);
}

TEST_CASE("integrate_flow examples") {
  const double h = 2e-3;
  const CurveTrace d = integrate_flow(kFlat, {-1, 0, 0}, 200, h);
  CHECK(std::abs(d.tau_plus - 2.0) < 1e-8);
  CHECK(std::abs(d.samples.back().state.x - 1.0) < 1e-10);
  CHECK(d.tau_minus == 0.0);

  const CurveTrace arc = integrate_flow(magnetic(1.0), {0, 0, 0}, 200, h);
  CHECK(std::abs(arc.tau_plus - kPi / 3) < 1e-7);
  CHECK(std::abs(arc.samples.back().state.x - std::sqrt(3.0) / 2) < 1e-8);
  CHECK(std::abs(arc.samples.back().state.y - 0.5) < 1e-8);

  const CurveTrace rad = integrate_flow(kFlat, {0, 0, kPi / 4}, 200, h);
  CHECK(std::abs(rad.tau_plus - 1.0) < 1e-8);
}

TEST_CASE("traces end on the boundary and satisfy the flow equation") {
  Gen g(17);
  const TwistedDisk disk = thermostat_disk();
  for (const auto& s : g.states(10, 0.9)) {
    const CurveTrace tr = integrate_flow(disk, s, 200, 2e-3);
    const auto& last = tr.samples.back().state;
    CHECK(std::abs(disk.surface.rho(last.x, last.y)) < 1e-10);
    // Midpoint-rule residual of consecutive samples against the generator.
    for (std::size_t i = 1; i + 2 < tr.samples.size(); i += 37) {
      const auto& a = tr.samples[i - 1];
      const auto& c = tr.samples[i + 1];
      const Eigen::Vector3d fd = (Eigen::Vector3d(c.state.x, c.state.y, c.state.theta) -
                                  Eigen::Vector3d(a.state.x, a.state.y, a.state.theta)) /
                                 (c.t - a.t);
      CHECK((fd - generator_rhs(disk, tr.samples[i].state)).norm() < 1e-5);
    }
  }
}

TEST_CASE("CapReached when the cap is too small") {
  CHECK_THROWS_AS(integrate_flow(kFlat, {-1, 0, 0}, 0.5, 1e-3), CapReached);
}

TEST_CASE("exit_times examples") {
  auto [p0, m0] = exit_times(kFlat, {0, 0, 0});
  CHECK(std::abs(p0 - 1) < 1e-10);
  CHECK(std::abs(m0 - 1) < 1e-10);
  auto [p1, m1] = exit_times(kFlat, {-1, 0, 0});
  CHECK(std::abs(p1 - 2) < 1e-10);
  CHECK(m1 == 0.0);
}

TEST_CASE("flat chord exit times over a 64x32 fan") {
  for (const auto& ray : boundary_fan(kFlat.surface, 64, 32)) {
    const double xv = ray.state.x * std::cos(ray.state.theta) + ray.state.y * std::sin(ray.state.theta);
    CHECK(std::abs(exit_times(kFlat, ray.state).first + 2 * xv) < 1e-8);
  }
}

TEST_CASE("magnetic arc exit times match the circle-intersection oracle") {
  Gen g(23);
  for (double b : {0.3, 0.5, 0.9}) {
    for (const auto& s : g.states(10, 0.8)) {
      CHECK(std::abs(exit_times(magnetic(b), s).first - arc_exit_oracle(b, s)) < 1e-7);
    }
  }
}

TEST_CASE("scattering relation") {
  const PhaseState out = scattering_relation(kFlat, {-1, 0, 0});
  CHECK(std::abs(out.x - 1) < 1e-10);
  CHECK(std::abs(out.y) < 1e-10);
  CHECK(std::abs(out.theta) < 1e-12);

  for (const auto& ray : boundary_fan(kFlat.surface, 8, 6)) {
    const auto [tau, m] = exit_times(kFlat, ray.state);
    const PhaseState a = scattering_relation(kFlat, ray.state);
    CHECK(std::abs(a.x - (ray.state.x + tau * std::cos(ray.state.theta))) < 1e-10);
    CHECK(std::abs(a.y - (ray.state.y + tau * std::sin(ray.state.theta))) < 1e-10);
    CHECK(std::abs(wrap_angle(a.theta - ray.state.theta + 1) - 1) < 1e-12);
  }

  // Magnetic: self-convergence against h/16.
  const PhaseState s{-1, 0, kPi / 2 - 0.3};
  FlowOptions coarse, fine;
  fine.h = coarse.step(magnetic(1)) / 16;
  const PhaseState a = scattering_relation(magnetic(1), s, coarse);
  const PhaseState b = scattering_relation(magnetic(1), s, fine);
  CHECK(std::hypot(a.x - b.x, a.y - b.y) < 1e-9);

  // alpha o alpha = id.
  Gen g(31);
  const TwistedDisk td = thermostat_disk();
  for (const auto& ray : random_boundary_fan(td.surface, 20, 77, 0.05)) {
    const PhaseState back = scattering_relation(td, scattering_relation(td, ray.state));
    CHECK(std::hypot(back.x - ray.state.x, back.y - ray.state.y) < 1e-6);
    CHECK(std::abs(wrap_angle(back.theta - ray.state.theta + 1) - 1) < 1e-6);
  }

  CHECK_THROWS_AS(scattering_relation(kFlat, {1, 0, kPi / 2}), GlancingRay);
}

TEST_CASE("nontrapping certificate") {
  const auto flat_states = random_interior_states(kFlat.surface, 50, 5, 0.8);
  CHECK(nontrapping_certificate(kFlat, flat_states, 1e-3).max_deviation < 1e-5);

  const auto mag = nontrapping_certificate(magnetic(0.5), flat_states, 1e-3);
  const auto mag_half = nontrapping_certificate(magnetic(0.5), flat_states, 5e-4);
  CHECK(mag.max_deviation < 1e-4);
  CHECK(mag_half.max_deviation < 1e-4);

  const auto diam = nontrapping_certificate(kFlat, {{-0.3, 0, 0}}, 1e-3);
  CHECK(std::abs(diam.values[0] - 2) < 1e-9);
}

TEST_CASE("flow group property and unit speed") {
  Gen g(41);
  const TwistedDisk td = thermostat_disk();
  for (const auto& s : g.states(20, 0.3)) {
    const double t = g.uniform(0.05, 0.3), r = g.uniform(0.05, 0.3);
    const PhaseState a = flow_state(td, s, t + r);
    const PhaseState b = flow_state(td, flow_state(td, s, r), t);
    CHECK(std::hypot(a.x - b.x, a.y - b.y) < 1e-8);
    CHECK(std::abs(wrap_angle(a.theta - b.theta + 1) - 1) < 1e-8);
    const Eigen::Vector3d d = generator_rhs(td, a);
    const Eigen::Vector2d v(d(0), d(1));
    CHECK(std::abs(td.surface.inner(a.base(), v, v) - 1) < 1e-10);
  }
}

TEST_CASE("time reversal consistency") {
  Gen g(43);
  const TwistedDisk td = thermostat_disk();
  for (const auto& s : g.states(20, 0.9)) {
    const double minus = exit_times(td, s).second;
    const double plus_rev = exit_times(td.reversed(), flipped(s)).first;
    CHECK(std::abs(minus - plus_rev) < 1e-8);
    // Backward exit lands where forward flow from that point returns to s.
    const auto [tm, entry] = forward_exit(td.reversed(), flipped(s));
    const PhaseState again = flow_state(td, flipped(entry), tm);
    CHECK(std::hypot(again.x - s.x, again.y - s.y) < 1e-8);
  }
}

TEST_CASE("RK4 self-convergence of exit times") {
  const TwistedDisk td = thermostat_disk();
  const PhaseState s{0.1, -0.2, 0.7};
  FlowOptions ref;
  ref.h = 1e-4;
  const double exact = exit_times(td, s, ref).first;
  FlowOptions a, b;
  a.h = 0.1;
  b.h = 0.05;
  const double ea = std::abs(exit_times(td, s, a).first - exact);
  const double eb = std::abs(exit_times(td, s, b).first - exact);
  CHECK(ea / eb >= 8.0);
}

TEST_CASE("tau tilde has no jumps across tangency") {
  // Rays from a fixed interior point sweep through directions tangent to
  // the boundary circle on the way; tau~ should vary continuously.
  const TwistedDisk td = magnetic(0.4);
  const int n = 400;
  double prev = 0, max_jump = 0;
  for (int i = 0; i <= n; ++i) {
    const PhaseState s{0.0, 0.95, kTwoPi * i / n};
    const auto [p, m] = exit_times(td, s);
    if (i > 0) max_jump = std::max(max_jump, std::abs((p - m) - prev));
    prev = p - m;
  }
  // Lipschitz-scale jump bound: a few times the angular step times the
  // chord length scale.
  CHECK(max_jump < 0.5);
}

TEST_CASE("extend_scenario") {
  const auto e0 = extend_scenario(kFlat, 0.2, 240, 32);
  CHECK(e0.certification.convexity.min_margin == doctest::Approx(1 / 1.2).epsilon(1e-12));
  const auto e1 = extend_scenario(magnetic(0.5), 0.2, 240, 32);
  CHECK(e1.certification.convexity.min_margin == doctest::Approx(1 / 1.2 - 0.5).epsilon(1e-12));
  CHECK_THROWS_AS(extend_scenario(magnetic(0.9), 0.2, 240, 32), ExtensionNotConvex);
  CHECK_THROWS_AS(extend_scenario(magnetic(0.5), 0.2, 0.05, 8), ExtensionTrapped);
}

TEST_CASE("trace CSV export") {
  const CurveTrace tr = integrate_flow(kFlat, {-1, 0, 0}, 10, 0.5);
  std::ostringstream os;
  write_trace_csv(os, tr);
  CHECK(os.str().rfind("t,x,y,theta\n0,-1,0,0\n", 0) == 0);
}
