#include "twistray/flow.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "twistray/errors.hpp"
#include "parallel.hpp"

namespace twistray {
namespace {

std::string describe(const PhaseState& s) {
  std::ostringstream os;
  os << std::setprecision(10) << "(x=" << s.x << ", y=" << s.y << ", theta=" << s.theta << ")";
  return os.str();
}

auto flow_rhs(const TwistedDisk& disk) {
  return [&disk](const OdeState& s, OdeState& out) {
    out.z = generator_rhs(disk, s.z(0), s.z(1), s.z(2), nullptr);
  };
}

}  // namespace

Eigen::Vector3d generator_rhs(const TwistedDisk& disk, double x, double y, double theta,
                              double* conformal_factor) {
  const PhiJet p = disk.surface.phi_first_jet(x, y);
  const double e = std::exp(-p.value);
  const double c = std::cos(theta), s = std::sin(theta);
  if (conformal_factor) *conformal_factor = e;
  return {e * c, e * s, e * (-p.dx * s + p.dy * c) + disk.lambda.value(x, y, theta)};
}

Eigen::Vector3d generator_rhs(const TwistedDisk& disk, const PhaseState& s) {
  return generator_rhs(disk, s.x, s.y, s.theta, nullptr);
}

bool is_outgoing_boundary(const TwistedDisk& disk, const PhaseState& s) {
  const double r = disk.surface.radius();
  if (std::abs(disk.surface.rho(s.x, s.y)) > 1e-10 * r * r) return false;
  return normal_component(s) < 0.0;
}

bool is_incoming_boundary(const TwistedDisk& disk, const PhaseState& s) {
  const double r = disk.surface.radius();
  if (std::abs(disk.surface.rho(s.x, s.y)) > 1e-10 * r * r) return false;
  return normal_component(s) > 0.0;
}

CurveTrace integrate_flow(const TwistedDisk& disk, const PhaseState& s0, double t_max,
                          double h) {
  if (!(h > 0.0)) throw std::invalid_argument("integrate_flow: step must be positive");
  CurveTrace trace;
  FlowOptions opt;
  opt.h = h;
  opt.time_cap = t_max;
  if (is_outgoing_boundary(disk, s0)) {
    trace.samples.push_back({0.0, s0});
  } else {
    auto rhs = flow_rhs(disk);
    ExitResult r = integrate_to_exit(rhs, make_state(s0), h, t_max, disk.surface.radius(),
                                     [&trace](double t, const OdeState& s) {
                                       trace.samples.push_back({t, s.phase()});
                                     });
    if (!r.exited)
      throw CapReached("integrate_flow: no exit before t = " + std::to_string(t_max) +
                       " from " + describe(s0));
    trace.tau_plus = r.t;
  }
  trace.exit = ExitKind::Forward;
  trace.tau_minus = exit_times(disk, s0, opt).second;
  return trace;
}

std::pair<double, PhaseState> forward_exit(const TwistedDisk& disk, const PhaseState& s,
                                           const FlowOptions& opt) {
  if (is_outgoing_boundary(disk, s)) return {0.0, s};
  auto rhs = flow_rhs(disk);
  const double cap = opt.cap(disk);
  ExitResult r = integrate_to_exit(rhs, make_state(s), opt.step(disk), cap, disk.surface.radius());
  if (!r.exited)
    throw CapReached("no exit before t = " + std::to_string(cap) + " from " + describe(s));
  return {r.t, normalized(r.state.phase())};
}

std::pair<double, double> exit_times(const TwistedDisk& disk, const PhaseState& s,
                                     const FlowOptions& opt) {
  const double plus = forward_exit(disk, s, opt).first;
  const double minus = forward_exit(disk.reversed(), flipped(s), opt).first;
  return {plus, minus};
}

PhaseState flow_state(const TwistedDisk& disk, const PhaseState& s, double t,
                      const FlowOptions& opt) {
  if (t == 0.0) return s;
  if (t > 0.0) {
    auto rhs = flow_rhs(disk);
    return normalized(
        integrate_for(rhs, make_state(s), t, opt.step(disk), disk.surface.radius()).phase());
  }
  const TwistedDisk rev = disk.reversed();
  auto rhs = flow_rhs(rev);
  const PhaseState back =
      integrate_for(rhs, make_state(flipped(s)), -t, opt.step(rev), rev.surface.radius())
          .phase();
  return flipped(back);
}

PhaseState scattering_relation(const TwistedDisk& disk, const PhaseState& s,
                               const FlowOptions& opt) {
  const double r = disk.surface.radius();
  if (std::abs(std::hypot(s.x, s.y) - r) > 1e-10 * r)
    throw OffBoundary("scattering_relation: state " + describe(s) + " is not on the boundary");
  const double vn = normal_component(s);
  if (std::abs(vn) <= opt.eps_glance)
    throw GlancingRay("scattering_relation: |<v,nu>| = " + std::to_string(std::abs(vn)) +
                      " at " + describe(s));
  if (vn > 0.0) return forward_exit(disk, s, opt).second;
  return flipped(forward_exit(disk.reversed(), flipped(s), opt).second);
}

CertificateReport nontrapping_certificate(const TwistedDisk& disk,
                                          const std::vector<PhaseState>& fan, double h_fd,
                                          const FlowOptions& opt) {
  CertificateReport rep;
  rep.values.resize(fan.size());
  auto tau_tilde = [&](const PhaseState& z) {
    const auto [p, m] = exit_times(disk, z, opt);
    return p - m;
  };
detail::for_each_parallel(static_cast<long>(fan.size()), [&](long i) {
    const PhaseState fwd = flow_state(disk, fan[i], h_fd, opt);
    const PhaseState bwd = flow_state(disk, fan[i], -h_fd, opt);
    rep.values[i] = (-tau_tilde(fwd) + tau_tilde(bwd)) / (2.0 * h_fd);
  });
  for (std::size_t i = 0; i < fan.size(); ++i) {
    const double dev = std::abs(rep.values[i] - 2.0);
    if (dev >= rep.max_deviation) {
      rep.max_deviation = dev;
      rep.worst = fan[i];
    }
  }
  return rep;
}

std::vector<FanRay> boundary_fan(const ConformalSurface& surface, int n_beta, int n_alpha,
                                 double eps_glance) {
  std::vector<FanRay> fan;
  fan.reserve(static_cast<std::size_t>(n_beta) * n_alpha);
  const double r = surface.radius();
  for (int i = 0; i < n_beta; ++i) {
    const double beta = kTwoPi * i / n_beta;
    for (int j = 0; j < n_alpha; ++j) {
      const double alpha = -0.5 * kPi + (j + 0.5) * kPi / n_alpha;
      if (std::cos(alpha) <= eps_glance) continue;
      fan.push_back({beta, alpha,
                     PhaseState{r * std::cos(beta), r * std::sin(beta),
                                wrap_angle(beta + kPi + alpha)}});
    }
  }
  return fan;
}

std::vector<FanRay> random_boundary_fan(const ConformalSurface& surface, int n,
                                        std::uint64_t seed, double eps_glance) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ub(0.0, kTwoPi), ua(-0.5 * kPi, 0.5 * kPi);
  const double r = surface.radius();
  std::vector<FanRay> fan;
  while (static_cast<int>(fan.size()) < n) {
    const double beta = ub(rng), alpha = ua(rng);
    if (std::cos(alpha) <= eps_glance) continue;
    fan.push_back({beta, alpha,
                   PhaseState{r * std::cos(beta), r * std::sin(beta),
                              wrap_angle(beta + kPi + alpha)}});
  }
  return fan;
}

std::vector<PhaseState> random_interior_states(const ConformalSurface& surface, int n,
                                               std::uint64_t seed, double shrink) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0), ua(0.0, kTwoPi);
  std::vector<PhaseState> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double rad = shrink * surface.radius() * std::sqrt(u01(rng));
    const double a = ua(rng);
    out.push_back({rad * std::cos(a), rad * std::sin(a), ua(rng)});
  }
  return out;
}

ExtendedScenario extend_scenario(const TwistedDisk& disk, double delta, double time_cap,
                                 int n_probe, const FlowOptions& opt) {
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("extend_scenario: delta must lie in (0, 1]");
  ExtendedScenario ext;
  ext.inner = disk;
  ext.outer = disk.with_radius(disk.surface.radius() * (1.0 + delta));
  ext.delta = delta;
  auto& cert = ext.certification;
  cert.convexity = strict_lambda_convexity_report(ext.outer.surface, ext.outer.lambda,
                                                  std::max(256, n_probe));
  if (!cert.convexity.convex())
    throw ExtensionNotConvex("outer disk of radius " +
                             std::to_string(ext.outer.surface.radius()) +
                             " has convexity margin " +
                             std::to_string(cert.convexity.min_margin) + " at " +
                             describe(cert.convexity.witness));
  FlowOptions o = opt;
  o.time_cap = time_cap;
  cert.time_cap = time_cap;
  std::vector<PhaseState> probes;
  for (const auto& ray : random_boundary_fan(ext.outer.surface, n_probe, 0x5eedULL))
    probes.push_back(ray.state);
  for (const auto& s : random_interior_states(ext.outer.surface, n_probe, 0x5eed1ULL))
    probes.push_back(s);
  for (const auto& s : probes) {
    try {
      const auto [p, m] = exit_times(ext.outer, s, o);
      cert.max_exit_time = std::max({cert.max_exit_time, p, m});
    } catch (const CapReached&) {
      throw ExtensionTrapped("probe " + describe(s) + " did not exit the outer disk before " +
                             std::to_string(time_cap));
    }
  }
  cert.probes = static_cast<int>(probes.size());
  return ext;
}

void write_trace_csv(std::ostream& os, const CurveTrace& trace) {
  os << "t,x,y,theta\n" << std::setprecision(17);
  for (const auto& s : trace.samples)
    os << s.t << ',' << s.state.x << ',' << s.state.y << ',' << s.state.theta << '\n';
}

}  // namespace twistray
