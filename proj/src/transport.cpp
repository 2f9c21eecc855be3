#include "twistray/transport.hpp"

#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
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

void require_influx(const TwistedDisk& disk, const PhaseState& s, const FlowOptions& opt) {
  const double r = disk.surface.radius();
  if (std::abs(std::hypot(s.x, s.y) - r) > 1e-10 * r)
    throw OffBoundary("state " + describe(s) + " is not on the boundary");
  const double vn = normal_component(s);
  if (std::abs(vn) <= opt.eps_glance)
    throw GlancingRay("|<v,nu>| = " + std::to_string(std::abs(vn)) + " at " + describe(s));
  if (vn < 0.0) throw std::invalid_argument("state " + describe(s) + " points outward");
}

/// Integrates the reversed flow from the exit point of s back to s, with
/// the payload ODE P' = f(x, y, theta, e, P) where theta is the angle of
/// the original (unreversed) direction.
template <typename PayloadRhs>
Mat solve_terminal(const TwistedDisk& disk, const PhaseState& s, Mat payload,
                   const FlowOptions& opt, PayloadRhs&& f) {
  const PhaseState exit = forward_exit(disk, s, opt).second;
  const TwistedDisk rev = disk.reversed();
  auto rhs = [&](const OdeState& st, OdeState& out) {
    double e = 0.0;
    out.z = generator_rhs(rev, st.z(0), st.z(1), st.z(2), &e);
    out.p = f(st.z(0), st.z(1), st.z(2) + kPi, e, st.p);
  };
  const double cap = opt.cap(rev);
  ExitResult r = integrate_to_exit(rhs, make_state(flipped(exit), std::move(payload)),
                                   opt.step(rev), cap, rev.surface.radius());
  if (!r.exited) throw CapReached("reversed ray from " + describe(exit) + " did not exit");
  return r.state.p;
}

using detail::for_each_parallel;

}  // namespace

AttenuationPair::AttenuationPair(MatrixField ax_, MatrixField ay_, MatrixField higgs_)
    : ax(std::move(ax_)), ay(std::move(ay_)), higgs(std::move(higgs_)) {
  const int n = higgs.rows();
  for (const MatrixField* f : {&ax, &ay, &higgs})
    if (f->rows() != n || f->cols() != n)
      throw DimensionMismatch("AttenuationPair: components must all be n x n");
}

Mat AttenuationPair::eval(double x, double y, double theta, double e) const {
  return cplx(e * std::cos(theta)) * ax.value(x, y) + cplx(e * std::sin(theta)) * ay.value(x, y) +
         higgs.value(x, y);
}

double AttenuationPair::flag_defect(const std::vector<PlanePoint>& samples) const {
  double worst = 0.0;
  for (const auto& p : samples) {
    if (unitary_connection) {
      const Mat a = ax.value(p.x, p.y), b = ay.value(p.x, p.y);
      worst = std::max({worst, (a + a.adjoint()).norm(), (b + b.adjoint()).norm()});
    }
    if (skew_higgs) {
      const Mat h = higgs.value(p.x, p.y);
      worst = std::max(worst, (h + h.adjoint()).norm());
    }
  }
  return worst;
}

Mat attenuation_eval(const AttenuationPair& pair, const ConformalSurface& surface,
                     const PhaseState& s) {
  return pair.eval(s.x, s.y, s.theta, std::exp(-surface.phi_value(s.x, s.y)));
}

SourceTerm::SourceTerm(MatrixField f0_, MatrixField ax_, MatrixField ay_)
    : f0(std::move(f0_)), ax(std::move(ax_)), ay(std::move(ay_)) {
  const int n = f0.rows();
  for (const MatrixField* f : {&f0, &ax, &ay})
    if (f->rows() != n || f->cols() != 1)
      throw DimensionMismatch("SourceTerm: components must all be n x 1");
}

Mat SourceTerm::eval(double x, double y, double theta, double e) const {
  return f0.value(x, y) + cplx(e * std::cos(theta)) * ax.value(x, y) +
         cplx(e * std::sin(theta)) * ay.value(x, y);
}

Mat SourceTerm::eval(const ConformalSurface& surface, const PhaseState& s) const {
  return eval(s.x, s.y, s.theta, std::exp(-surface.phi_value(s.x, s.y)));
}

SourceTerm operator+(const SourceTerm& a, const SourceTerm& b) {
  return SourceTerm(a.f0 + b.f0, a.ax + b.ax, a.ay + b.ay);
}

SourceTerm operator*(cplx c, const SourceTerm& a) {
  return SourceTerm(c * a.f0, c * a.ax, c * a.ay);
}

GaugeElement GaugeElement::certify(PolyField<cplx> u, const ConformalSurface& surface,
                                   int n_grid) {
  if (u.rows() != u.cols()) throw DimensionMismatch("GaugeElement: u must be square");
  GaugeElement g;
  const double r = surface.radius();
  const Mat id = identity(u.rows());
  double bdry = 0.0;
  for (int j = 0; j < 4 * n_grid; ++j) {
    const double b = kTwoPi * j / (4 * n_grid);
    bdry = std::max(bdry, (u.value(r * std::cos(b), r * std::sin(b)) - id).norm());
  }
  g.boundary_flag = bdry <= 1e-10;
  for (int i = 0; i <= n_grid; ++i) {
    const double rad = r * i / n_grid;
    const int n_ang = i == 0 ? 1 : 4 * n_grid;
    for (int j = 0; j < n_ang; ++j) {
      const double a = kTwoPi * j / n_ang;
      const double x = rad * std::cos(a), y = rad * std::sin(a);
      Eigen::JacobiSVD<Mat> svd(u.value(x, y));
      const auto& sv = svd.singularValues();
      const double cond = sv(0) / sv(sv.size() - 1);
      if (!std::isfinite(cond) || cond > 1e12)
        throw SingularGauge("gauge is singular near (" + std::to_string(x) + ", " +
                            std::to_string(y) + ")");
      g.max_condition = std::max(g.max_condition, cond);
    }
  }
  g.u = std::move(u);
  return g;
}

Mat nonabelian_transform(const TwistedDisk& disk, const AttenuationPair& pair,
                         const PhaseState& s, const FlowOptions& opt) {
  require_influx(disk, s, opt);
  return solve_terminal(disk, s, identity(pair.n()), opt,
                        [&pair](double x, double y, double th, double e, const Mat& w) -> Mat {
                          return pair.eval(x, y, th, e) * w;
                        });
}

Mat attenuated_transform(const TwistedDisk& disk, const AttenuationPair& pair,
                         const SourceTerm& source, const PhaseState& s, const FlowOptions& opt) {
  if (source.n() != pair.n()) throw DimensionMismatch("attenuated_transform: n differs");
  require_influx(disk, s, opt);
  return solve_terminal(disk, s, Mat::Zero(pair.n(), 1), opt,
                        [&](double x, double y, double th, double e, const Mat& w) -> Mat {
                          return pair.eval(x, y, th, e) * w + source.eval(x, y, th, e);
                        });
}

Mat cocycle(const TwistedDisk& disk, const AttenuationPair& pair, const PhaseState& s, double t,
            const FlowOptions& opt) {
  if (t == 0.0) return identity(pair.n());
  if (t < 0.0) throw std::invalid_argument("cocycle: t must be nonnegative");
  auto rhs = [&](const OdeState& st, OdeState& out) {
    double e = 0.0;
    out.z = generator_rhs(disk, st.z(0), st.z(1), st.z(2), &e);
    out.p = -(pair.eval(st.z(0), st.z(1), st.z(2), e) * st.p);
  };
  return integrate_for(rhs, make_state(s, identity(pair.n())), t, opt.step(disk),
                       disk.surface.radius())
      .p;
}

Mat inverse_integrating_factor(const ExtendedScenario& ext, const AttenuationPair& pair,
                               const PhaseState& s, const FlowOptions& opt) {
  const TwistedDisk& outer = ext.outer;
  auto rhs = [&](const OdeState& st, OdeState& out) {
    double e = 0.0;
    out.z = generator_rhs(outer, st.z(0), st.z(1), st.z(2), &e);
    out.p = -(pair.eval(st.z(0), st.z(1), st.z(2), e) * st.p);
  };
  const double cap = opt.cap(outer);
  ExitResult r = integrate_to_exit(rhs, make_state(s, identity(pair.n())), opt.step(outer), cap,
                                   outer.surface.radius());
  if (!r.exited) throw CapReached("no outer exit from " + describe(s));
  return r.state.p;
}

Mat integrating_factor(const ExtendedScenario& ext, const AttenuationPair& pair,
                       const PhaseState& s, const FlowOptions& opt) {
  return inverse_integrating_factor(ext, pair, s, opt).partialPivLu().inverse();
}

Mat transport_via_integrating_factor(const ExtendedScenario& ext, const AttenuationPair& pair,
                                     const SourceTerm& source, const PhaseState& s,
                                     const FlowOptions& opt, const QuadratureOptions& quad) {
  if (source.n() != pair.n()) throw DimensionMismatch("transport_via_integrating_factor: n differs");
  const TwistedDisk& disk = ext.inner;
  if (std::hypot(s.x, s.y) >= disk.surface.radius() * (1.0 - 1e-10)) require_influx(disk, s, opt);
  const double tau = forward_exit(disk, s, opt).first;
  const int n_nodes = 2 * std::max(1, static_cast<int>(std::ceil(tau / (2.0 * quad.step))));
  const double spacing = tau / n_nodes;
  const int sub = std::max(1, static_cast<int>(std::ceil(spacing / opt.step(disk) - 1e-9)));

  std::vector<PhaseState> nodes;
  nodes.reserve(n_nodes + 1);
  auto rhs = [&](const OdeState& st, OdeState& out) {
    out.z = generator_rhs(disk, st.z(0), st.z(1), st.z(2), nullptr);
  };
  // Use the outer radius as the guard: the last node sits on the inner
  // boundary up to integration error.
  integrate_for(rhs, make_state(s), tau, tau / (static_cast<double>(n_nodes) * sub),
                ext.outer.surface.radius(), [&](int i, const OdeState& st) {
                  if (i % sub == 0) nodes.push_back(st.phase());
                });

  std::vector<Mat> integrand(nodes.size());
  Mat r_inv_start;
  for_each_parallel(static_cast<long>(nodes.size()), [&](long k) {
    const Mat c = inverse_integrating_factor(ext, pair, nodes[k], opt);
    integrand[k] = c * source.eval(disk.surface, nodes[k]);
    if (k == 0) r_inv_start = c;
  });

  Mat sum = integrand.front() + integrand.back();
  for (std::size_t k = 1; k + 1 < integrand.size(); ++k)
    sum += cplx(k % 2 == 1 ? 4.0 : 2.0) * integrand[k];
  const Mat integral = cplx(spacing / 3.0) * sum;
  return r_inv_start.partialPivLu().solve(integral);
}

AttenuationPair gauge_transform(const AttenuationPair& pair, const GaugeElement& g) {
  if (g.u.rows() != pair.n()) throw DimensionMismatch("gauge_transform: n differs");
  const MatrixField u(g.u), ux(g.u.diff_x()), uy(g.u.diff_y());
  const MatrixField ui = inverse(u);
  return AttenuationPair(ui * ux + ui * pair.ax * u, ui * uy + ui * pair.ay * u,
                         ui * pair.higgs * u);
}

AttenuationPair endomorphism_pair(const AttenuationPair& a, const AttenuationPair& b) {
  if (a.n() != b.n()) throw DimensionMismatch("endomorphism_pair: pairs have different n");
  if (a.n() * a.n() > kMaxDim)
    throw DimensionMismatch("endomorphism_pair: n^2 exceeds the supported dimension");
  return AttenuationPair(commutator_operator(a.ax, b.ax), commutator_operator(a.ay, b.ay),
                         commutator_operator(a.higgs, b.higgs));
}

SourceTerm difference_source(const AttenuationPair& a, const AttenuationPair& b) {
  if (a.n() != b.n()) throw DimensionMismatch("difference_source: pairs have different n");
  return SourceTerm(vectorized(a.higgs - b.higgs), vectorized(a.ax - b.ax),
                    vectorized(a.ay - b.ay));
}

FanResidual pseudolinearization_residual(const TwistedDisk& disk, const AttenuationPair& a,
                                         const AttenuationPair& b,
                                         const std::vector<PhaseState>& fan,
                                         const FlowOptions& opt) {
  const AttenuationPair e = endomorphism_pair(a, b);
  const SourceTerm src = difference_source(a, b);
  const int n = a.n();
  FanResidual out;
  out.residuals.resize(fan.size());
  for_each_parallel(static_cast<long>(fan.size()), [&](long i) {
    const Mat ca = nonabelian_transform(disk, a, fan[i], opt);
    const Mat cb = nonabelian_transform(disk, b, fan[i], opt);
    const Mat lin = unvec(attenuated_transform(disk, e, src, fan[i], opt), n, n);
    out.residuals[i] = (ca * cb.partialPivLu().inverse() - identity(n) - lin).norm();
  });
  for (std::size_t i = 0; i < fan.size(); ++i)
    if (out.residuals[i] >= out.max_residual) {
      out.max_residual = out.residuals[i];
      out.worst = fan[i];
    }
  return out;
}

SourceTerm kernel_element(const AttenuationPair& pair, const PolyField<cplx>& p,
                          const ConformalSurface& surface, int n_boundary) {
  if (p.rows() != pair.n() || p.cols() != 1)
    throw DimensionMismatch("kernel_element: p must be an n-vector field");
  const double r = surface.radius();
  for (int j = 0; j < n_boundary; ++j) {
    const double b = kTwoPi * j / n_boundary;
    const double x = r * std::cos(b), y = r * std::sin(b);
    const double v = p.value(x, y).norm();
    if (v > 1e-10)
      throw BoundaryNonzero("kernel_element: |p| = " + std::to_string(v) + " at boundary point (" +
                            std::to_string(x) + ", " + std::to_string(y) + ")");
  }
  const MatrixField pf(p), px(p.diff_x()), py(p.diff_y());
  return SourceTerm(pair.higgs * pf, px + pair.ax * pf, py + pair.ay * pf);
}

GaugeWitnessReport gauge_equivalence_witness(const TwistedDisk& disk, const AttenuationPair& a,
                                             const AttenuationPair& b, const GaugeElement& g,
                                             const std::vector<PhaseState>& interior,
                                             const std::vector<PhaseState>& fan,
                                             const FlowOptions& opt) {
  if (a.n() != b.n() || g.u.rows() != a.n())
    throw DimensionMismatch("gauge_equivalence_witness: dimensions differ");
  GaugeWitnessReport rep;
  for (const auto& s : interior) {
    const double e = std::exp(-disk.surface.phi_value(s.x, s.y));
    const auto j = g.u.first_jet(s.x, s.y);
    const auto lu = j.value.partialPivLu();
    if (std::abs(lu.determinant()) < 1e-14)
      throw SingularGauge("gauge is singular at " + describe(s));
    // u depends on the base point only: (X + lambda V) u = du(v).
    const Mat du = cplx(e * std::cos(s.theta)) * j.dx + cplx(e * std::sin(s.theta)) * j.dy;
    const Mat predicted = lu.solve(du) + lu.solve(a.eval(s.x, s.y, s.theta, e) * j.value);
    rep.algebraic =
        std::max(rep.algebraic, (b.eval(s.x, s.y, s.theta, e) - predicted).norm());
  }
  std::vector<double> diff(fan.size());
  for_each_parallel(static_cast<long>(fan.size()), [&](long i) {
    diff[i] = (nonabelian_transform(disk, a, fan[i], opt) -
               nonabelian_transform(disk, b, fan[i], opt))
                  .norm();
  });
  for (double d : diff) rep.scattering = std::max(rep.scattering, d);
  return rep;
}

namespace {

template <typename Eval>
FanData fan_data(const std::vector<FanRay>& fan, Eval&& eval) {
  std::vector<std::optional<Mat>> vals(fan.size());
  for_each_parallel(static_cast<long>(fan.size()), [&](long i) {
    try {
      vals[i] = eval(fan[i].state);
    } catch (const GlancingRay&) {
    }
  });
  FanData out;
  for (std::size_t i = 0; i < fan.size(); ++i) {
    if (vals[i]) {
      out.rays.push_back(fan[i]);
      out.values.push_back(*vals[i]);
    } else {
      ++out.skipped;
    }
  }
  return out;
}

}  // namespace

FanData scattering_data(const TwistedDisk& disk, const AttenuationPair& pair,
                        const std::vector<FanRay>& fan, const FlowOptions& opt) {
  return fan_data(fan, [&](const PhaseState& s) { return nonabelian_transform(disk, pair, s, opt); });
}

FanData transform_data(const TwistedDisk& disk, const AttenuationPair& pair,
                       const SourceTerm& source, const std::vector<FanRay>& fan,
                       const FlowOptions& opt) {
  return fan_data(fan, [&](const PhaseState& s) {
    return attenuated_transform(disk, pair, source, s, opt);
  });
}

void write_fan_csv(std::ostream& os, const FanData& data, char prefix) {
  os << "beta,alpha_angle";
  if (!data.values.empty()) {
    const Mat& m = data.values.front();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        std::string name(1, prefix);
        name += std::to_string(i);
        if (m.cols() > 1) name += std::to_string(j);
        os << ',' << name << "_re," << name << "_im";
      }
  }
  os << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < data.values.size(); ++k) {
    os << data.rays[k].beta << ',' << data.rays[k].alpha;
    const Mat& m = data.values[k];
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) os << ',' << m(i, j).real() << ',' << m(i, j).imag();
    os << '\n';
  }
  os << "# skipped," << data.skipped << '\n';
}

}  // namespace twistray
