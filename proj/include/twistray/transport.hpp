#pragma once

#include <iosfwd>
#include <vector>

#include "twistray/field.hpp"
#include "twistray/flow.hpp"

namespace twistray {

/// Matrix 1-form A = A_x dx + A_y dy and Higgs field Phi, both n x n.
struct AttenuationPair {
  MatrixField ax, ay, higgs;
  bool unitary_connection = false;
  bool skew_higgs = false;

  AttenuationPair() : AttenuationPair(1) {}
  explicit AttenuationPair(int n)
      : ax(MatrixField::zero(n, n)), ay(MatrixField::zero(n, n)), higgs(MatrixField::zero(n, n)) {}
  AttenuationPair(MatrixField ax_, MatrixField ay_, MatrixField higgs_);

  int n() const { return higgs.rows(); }

  /// A_x v^1 + A_y v^2 + Phi with v = e(cos theta, sin theta), e = e^{-phi}.
  Mat eval(double x, double y, double theta, double e) const;

  /// Largest skew-Hermitian defect of the flagged components on the samples;
  /// zero when no flag is set.
  double flag_defect(const std::vector<PlanePoint>& samples) const;
};

Mat attenuation_eval(const AttenuationPair& pair, const ConformalSurface& surface,
                     const PhaseState& s);

/// f(x, v) = f0(x) + alpha_x v^1 + alpha_y v^2 with n x 1 fields.
struct SourceTerm {
  MatrixField f0, ax, ay;

  SourceTerm() : SourceTerm(1) {}
  explicit SourceTerm(int n)
      : f0(MatrixField::zero(n, 1)), ax(MatrixField::zero(n, 1)), ay(MatrixField::zero(n, 1)) {}
  SourceTerm(MatrixField f0_, MatrixField ax_, MatrixField ay_);

  int n() const { return f0.rows(); }
  Mat eval(double x, double y, double theta, double e) const;
  Mat eval(const ConformalSurface& surface, const PhaseState& s) const;
};

SourceTerm operator+(const SourceTerm& a, const SourceTerm& b);
SourceTerm operator*(cplx c, const SourceTerm& a);

/// Gauge u: M -> GL(n, C) with exact partials.
struct GaugeElement {
  PolyField<cplx> u;
  bool boundary_flag = false;   // u = Id on boundary samples to 1e-10
  double max_condition = 1.0;   // over the interior sample grid

  /// Checks invertibility on a polar grid and the boundary condition.
  /// SingularGauge names the first bad point.
  static GaugeElement certify(PolyField<cplx> u, const ConformalSurface& surface,
                              int n_grid = 24);
};

/// C^lambda_{A,Phi}(s): U(0) for U' + A U = 0, U(tau) = Id.
Mat nonabelian_transform(const TwistedDisk& disk, const AttenuationPair& pair,
                         const PhaseState& s, const FlowOptions& opt = {});

/// I^lambda_{A,Phi}(f)(s): u(0) for u' + A u = -f, u(tau) = 0.
Mat attenuated_transform(const TwistedDisk& disk, const AttenuationPair& pair,
                         const SourceTerm& source, const PhaseState& s,
                         const FlowOptions& opt = {});

/// C(s, t) for C' + A(phi_r s) C = 0, C(s, 0) = Id, on the given disk.
Mat cocycle(const TwistedDisk& disk, const AttenuationPair& pair, const PhaseState& s, double t,
            const FlowOptions& opt = {});

/// C(s, tau_0(s)) on the outer disk, i.e. R(s)^{-1}.
Mat inverse_integrating_factor(const ExtendedScenario& ext, const AttenuationPair& pair,
                               const PhaseState& s, const FlowOptions& opt = {});

/// R(s) = C(s, tau_0(s))^{-1} with tau_0 the outer exit time.
Mat integrating_factor(const ExtendedScenario& ext, const AttenuationPair& pair,
                       const PhaseState& s, const FlowOptions& opt = {});

struct QuadratureOptions {
  double step = 0.02;  // target node spacing for composite Simpson
};

/// u(s) = R(s) int_0^tau (R^{-1} f)(phi_t s) dt by composite Simpson, with
/// R evaluated independently at every node. s may be interior; on the
/// boundary it must be influx (OffBoundary otherwise).
Mat transport_via_integrating_factor(const ExtendedScenario& ext, const AttenuationPair& pair,
                                     const SourceTerm& source, const PhaseState& s,
                                     const FlowOptions& opt = {},
                                     const QuadratureOptions& quad = {});

/// (u^{-1} du + u^{-1} A u, u^{-1} Phi u) with exact derivative rules.
AttenuationPair gauge_transform(const AttenuationPair& pair, const GaugeElement& u);

/// H -> A H - H B on column-major vec(H), componentwise.
AttenuationPair endomorphism_pair(const AttenuationPair& a, const AttenuationPair& b);

/// The n^2-vector source vec(A - B), split into its form and function parts.
SourceTerm difference_source(const AttenuationPair& a, const AttenuationPair& b);

struct FanResidual {
  double max_residual = 0.0;
  std::vector<double> residuals;
  PhaseState worst;
};

/// max over the fan of |C_A C_B^{-1} - Id - I_{E(A,B)}(A - B)|_F.
FanResidual pseudolinearization_residual(const TwistedDisk& disk, const AttenuationPair& a,
                                         const AttenuationPair& b,
                                         const std::vector<PhaseState>& fan,
                                         const FlowOptions& opt = {});

/// f0 = Phi p, alpha = dp + A p for an n x 1 polynomial p vanishing on the
/// boundary (checked on n_boundary samples; BoundaryNonzero otherwise).
SourceTerm kernel_element(const AttenuationPair& pair, const PolyField<cplx>& p,
                          const ConformalSurface& surface, int n_boundary = 64);

struct GaugeWitnessReport {
  double algebraic = 0.0;   // max |B - u^{-1}(X + lambda V)u - u^{-1} A u|_F
  double scattering = 0.0;  // max |C_A - C_B|_F over the fan
};

GaugeWitnessReport gauge_equivalence_witness(const TwistedDisk& disk, const AttenuationPair& a,
                                             const AttenuationPair& b, const GaugeElement& u,
                                             const std::vector<PhaseState>& interior,
                                             const std::vector<PhaseState>& fan,
                                             const FlowOptions& opt = {});

/// Scattering data over a fan; rays that throw GlancingRay are skipped.
struct FanData {
  std::vector<FanRay> rays;
  std::vector<Mat> values;
  int skipped = 0;
};

FanData scattering_data(const TwistedDisk& disk, const AttenuationPair& pair,
                        const std::vector<FanRay>& fan, const FlowOptions& opt = {});
FanData transform_data(const TwistedDisk& disk, const AttenuationPair& pair,
                       const SourceTerm& source, const std::vector<FanRay>& fan,
                       const FlowOptions& opt = {});

/// beta, alpha_angle, then (re, im) per entry in row-major order, and a
/// trailing "# skipped,<count>" row.
void write_fan_csv(std::ostream& os, const FanData& data, char prefix);

}  // namespace twistray
