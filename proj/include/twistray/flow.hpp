#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "twistray/geometry.hpp"
#include "twistray/integrator.hpp"
#include "twistray/lambda_field.hpp"

namespace twistray {

/// A conformal disk together with its twist; the data the flow needs.
struct TwistedDisk {
  ConformalSurface surface;
  LambdaField lambda;

  /// The disk whose flow is the time reversal of this one, in the sense
  /// that (x, theta) -> (x, theta + pi) conjugates the two.
  TwistedDisk reversed() const { return {surface, lambda.reversed()}; }
  TwistedDisk with_radius(double r) const { return {surface.with_radius(r), lambda}; }
};

/// Step and cap; zero means "derive from the disk diameter".
struct FlowOptions {
  double h = 0.0;         // default 1e-3 * diameter
  double time_cap = 0.0;  // default 100 * diameter
  double eps_glance = 1e-3;

  double step(const TwistedDisk& d) const { return h > 0 ? h : 1e-3 * d.surface.diameter(); }
  double cap(const TwistedDisk& d) const {
    return time_cap > 0 ? time_cap : 100.0 * d.surface.diameter();
  }
};

/// (dx/dt, dy/dt, dtheta/dt) of the generator X + lambda V.
Eigen::Vector3d generator_rhs(const TwistedDisk& disk, const PhaseState& s);

/// Generator evaluation that also hands back e^{-phi} for reuse by payload
/// right-hand sides.
Eigen::Vector3d generator_rhs(const TwistedDisk& disk, double x, double y, double theta,
                              double* conformal_factor);

enum class ExitKind { Forward, Backward, Capped };

struct TraceSample {
  double t = 0.0;
  PhaseState state;
};

struct CurveTrace {
  std::vector<TraceSample> samples;
  ExitKind exit = ExitKind::Capped;
  double tau_plus = 0.0;
  double tau_minus = 0.0;
};

/// Forward RK4 trace from s0 until it exits; CapReached past t_max.
CurveTrace integrate_flow(const TwistedDisk& disk, const PhaseState& s0, double t_max,
                          double h);

/// True when s sits on the boundary circle (|rho| below 1e-10 r^2) with v
/// pointing strictly outward.
bool is_outgoing_boundary(const TwistedDisk& disk, const PhaseState& s);
bool is_incoming_boundary(const TwistedDisk& disk, const PhaseState& s);

/// State with the opposite unit vector: theta + pi.
inline PhaseState flipped(const PhaseState& s) { return normalized({s.x, s.y, s.theta + kPi}); }

/// Forward exit time and exit state.
std::pair<double, PhaseState> forward_exit(const TwistedDisk& disk, const PhaseState& s,
                                           const FlowOptions& opt = {});

/// (tau_plus, tau_minus); tau_minus integrates the reversed generator.
std::pair<double, double> exit_times(const TwistedDisk& disk, const PhaseState& s,
                                     const FlowOptions& opt = {});

/// phi_t(s) for either sign of t; LeftManifold when the orbit exits first.
PhaseState flow_state(const TwistedDisk& disk, const PhaseState& s, double t,
                      const FlowOptions& opt = {});

/// alpha(s) = phi_{tau~}(s) for a non-glancing boundary state.
PhaseState scattering_relation(const TwistedDisk& disk, const PhaseState& s,
                               const FlowOptions& opt = {});

struct CertificateReport {
  double max_deviation = 0.0;
  std::vector<double> values;  // finite-difference (X + lambda V)(-tau~)
  PhaseState worst;
};

CertificateReport nontrapping_certificate(const TwistedDisk& disk,
                                          const std::vector<PhaseState>& fan, double h_fd,
                                          const FlowOptions& opt = {});

/// A fan ray on the boundary: beta is the boundary angle, alpha the angle
/// of v from the inward normal, theta = beta + pi + alpha.
struct FanRay {
  double beta = 0.0;
  double alpha = 0.0;
  PhaseState state;
};

/// n_beta equally spaced boundary points times n_alpha direction angles at
/// the midpoints of (-pi/2, pi/2); rays with cos(alpha) <= eps are dropped.
std::vector<FanRay> boundary_fan(const ConformalSurface& surface, int n_beta, int n_alpha,
                                 double eps_glance = 1e-3);

/// n random influx rays with |<v, nu>| > eps_glance.
std::vector<FanRay> random_boundary_fan(const ConformalSurface& surface, int n,
                                        std::uint64_t seed, double eps_glance = 1e-3);

/// n random states with base point at radius at most shrink * radius.
std::vector<PhaseState> random_interior_states(const ConformalSurface& surface, int n,
                                               std::uint64_t seed, double shrink = 0.9);

struct ExtensionCertificate {
  ConvexityReport convexity;
  double max_exit_time = 0.0;
  double time_cap = 0.0;
  int probes = 0;
};

/// A disk of radius r (1 + delta) carrying the same field expressions,
/// certified strictly lambda-convex and nontrapping on probes.
struct ExtendedScenario {
  TwistedDisk inner;
  TwistedDisk outer;
  double delta = 0.0;
  ExtensionCertificate certification;
};

ExtendedScenario extend_scenario(const TwistedDisk& disk, double delta, double time_cap,
                                 int n_probe, const FlowOptions& opt = {});

/// Writes t,x,y,theta rows.
void write_trace_csv(std::ostream& os, const CurveTrace& trace);

}  // namespace twistray
