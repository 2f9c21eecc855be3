#include "twistray/geometry.hpp"

#include <cmath>
#include <limits>

#include "twistray/errors.hpp"

namespace twistray {

ConformalSurface::ConformalSurface(PolyField<double> phi, double radius)
    : phi_(std::move(phi)), radius_(radius) {
  if (phi_.rows() != 1 || phi_.cols() != 1)
    throw std::invalid_argument("ConformalSurface: phi must be scalar");
  if (!(radius > 0.0)) throw std::invalid_argument("ConformalSurface: radius must be positive");
}

double ConformalSurface::phi_value(double x, double y) const { return phi_.value(x, y)(0, 0); }

PhiJet ConformalSurface::phi_jet(double x, double y) const {
  const auto j = phi_.jet(x, y);
  return {j.value(0, 0), j.dx(0, 0), j.dy(0, 0), j.dxx(0, 0), j.dxy(0, 0), j.dyy(0, 0)};
}

PhiJet ConformalSurface::phi_first_jet(double x, double y) const {
  const auto j = phi_.first_jet(x, y);
  return {j.value(0, 0), j.dx(0, 0), j.dy(0, 0), 0.0, 0.0, 0.0};
}

double ConformalSurface::inner(const PlanePoint& p, const Eigen::Vector2d& a,
                               const Eigen::Vector2d& b) const {
  return std::exp(2.0 * phi_value(p.x, p.y)) * a.dot(b);
}

Eigen::Vector2d ConformalSurface::unit_vector(const PhaseState& s) const {
  return std::exp(-phi_value(s.x, s.y)) * Eigen::Vector2d(std::cos(s.theta), std::sin(s.theta));
}

double gaussian_curvature(const ConformalSurface& surface, const PlanePoint& p) {
  const PhiJet j = surface.phi_jet(p.x, p.y);
  return -std::exp(-2.0 * j.value) * (j.dxx + j.dyy);
}

namespace angular {

AngularFactor exp_mode(int k) {
  return [k](double t) {
    const cplx e = std::polar(1.0, k * t);
    const cplx ik(0.0, k);
    return AngularJet{e, ik * e, ik * ik * e};
  };
}

AngularFactor cos_mode(int k) {
  return [k](double t) {
    const double c = std::cos(k * t), s = std::sin(k * t);
    return AngularJet{c, -k * s, -double(k * k) * c};
  };
}

AngularFactor sin_mode(int k) {
  return [k](double t) {
    const double c = std::cos(k * t), s = std::sin(k * t);
    return AngularJet{s, k * c, -double(k * k) * s};
  };
}

AngularFactor linear() {
  return [](double t) { return AngularJet{t, 1.0, 0.0}; };
}

}  // namespace angular

TestFunction separable_test_function(const PolyField<cplx>& c, AngularFactor g) {
  if (c.rows() != 1 || c.cols() != 1)
    throw std::invalid_argument("separable_test_function: coefficient must be scalar");
  return [c, g = std::move(g)](const PhaseState& s) {
    const auto j = c.jet(s.x, s.y);
    const AngularJet a = g(s.theta);
    const cplx v = j.value(0, 0), vx = j.dx(0, 0), vy = j.dy(0, 0);
    SMJet out;
    out.value = v * a.value;
    out.grad << vx * a.value, vy * a.value, v * a.d1;
    out.hess(0, 0) = j.dxx(0, 0) * a.value;
    out.hess(0, 1) = out.hess(1, 0) = j.dxy(0, 0) * a.value;
    out.hess(1, 1) = j.dyy(0, 0) * a.value;
    out.hess(0, 2) = out.hess(2, 0) = vx * a.d1;
    out.hess(1, 2) = out.hess(2, 1) = vy * a.d1;
    out.hess(2, 2) = v * a.d2;
    return out;
  };
}

FrameCoefficients frame_coefficients(const ConformalSurface& surface, FrameVector tag,
                                     const PhaseState& s) {
  FrameCoefficients f;
  if (tag == FrameVector::V) {
    f.coeff << 0.0, 0.0, 1.0;
    return f;
  }
  const PhiJet p = surface.phi_jet(s.x, s.y);
  const double e = std::exp(-p.value);
  const double c = std::cos(s.theta), sn = std::sin(s.theta);
  if (tag == FrameVector::X) {
    const double t = e * (-p.dx * sn + p.dy * c);
    f.coeff << e * c, e * sn, t;
    f.jacobian << -p.dx * e * c, -p.dy * e * c, -e * sn,
        -p.dx * e * sn, -p.dy * e * sn, e * c,
        -p.dx * t + e * (-p.dxx * sn + p.dxy * c), -p.dy * t + e * (-p.dxy * sn + p.dyy * c),
        e * (-p.dx * c - p.dy * sn);
  } else {
    const double t = e * (p.dx * c + p.dy * sn);
    f.coeff << e * sn, -e * c, t;
    f.jacobian << -p.dx * e * sn, -p.dy * e * sn, e * c,
        p.dx * e * c, p.dy * e * c, e * sn,
        -p.dx * t + e * (p.dxx * c + p.dxy * sn), -p.dy * t + e * (p.dxy * c + p.dyy * sn),
        e * (-p.dx * sn + p.dy * c);
  }
  return f;
}

cplx frame_apply(const ConformalSurface& surface, FrameVector tag, const TestFunction& u,
                 const PhaseState& s) {
  const FrameCoefficients f = frame_coefficients(surface, tag, s);
  return f.coeff.cast<cplx>().dot(u(s).grad);
}

cplx bracket_apply(const ConformalSurface& surface, FrameVector w1, FrameVector w2,
                   const TestFunction& u, const PhaseState& s) {
  const FrameCoefficients a = frame_coefficients(surface, w1, s);
  const FrameCoefficients b = frame_coefficients(surface, w2, s);
  const SMJet j = u(s);
  const Eigen::Vector3cd ca = a.coeff.cast<cplx>(), cb = b.coeff.cast<cplx>();
  // W1(W2 u) = (J2 w1) . grad u + w1^T H w2, and symmetrically.
  const cplx first = (b.jacobian * a.coeff - a.jacobian * b.coeff).cast<cplx>().dot(j.grad);
  const cplx second = ca.transpose() * j.hess * cb;
  const cplx third = cb.transpose() * j.hess * ca;
  return first + second - third;
}

StructureResidual check_structure_equations(const ConformalSurface& surface,
                                            const TestFunction& u,
                                            const std::vector<PhaseState>& samples) {
  StructureResidual r;
  for (const auto& s : samples) {
    const cplx xu = frame_apply(surface, FrameVector::X, u, s);
    const cplx pu = frame_apply(surface, FrameVector::Xperp, u, s);
    const cplx vu = frame_apply(surface, FrameVector::V, u, s);
    const double k = gaussian_curvature(surface, s.base());
    r.x_v = std::max(
        r.x_v, std::abs(bracket_apply(surface, FrameVector::X, FrameVector::V, u, s) - pu));
    r.xperp_v = std::max(
        r.xperp_v, std::abs(bracket_apply(surface, FrameVector::Xperp, FrameVector::V, u, s) + xu));
    r.x_xperp = std::max(
        r.x_xperp,
        std::abs(bracket_apply(surface, FrameVector::X, FrameVector::Xperp, u, s) + k * vu));
  }
  return r;
}

double sasaki_inner(const ConformalSurface& surface, const PhaseState& s,
                    const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const PhiJet p = surface.phi_first_jet(s.x, s.y);
  const double va = a(2) - p.dy * a(0) + p.dx * a(1);
  const double vb = b(2) - p.dy * b(0) + p.dx * b(1);
  return std::exp(2.0 * p.value) * (a(0) * b(0) + a(1) * b(1)) + va * vb;
}

double normal_component(const PhaseState& s) {
  return -std::cos(s.theta - std::atan2(s.y, s.x));
}

double second_fundamental_form(const ConformalSurface& surface, const PlanePoint& b, double) {
  const double r = surface.radius();
  const double off = std::abs(std::hypot(b.x, b.y) - r);
  if (off > 1e-10)
    throw OffBoundary("second_fundamental_form: point (" + std::to_string(b.x) + ", " +
                      std::to_string(b.y) + ") is " + std::to_string(off) +
                      " off the boundary circle");
  const PhiJet p = surface.phi_first_jet(b.x, b.y);
  const double radial = (b.x * p.dx + b.y * p.dy) / r;
  return std::exp(-p.value) * (1.0 / r + radial);
}

ConvexityReport strict_lambda_convexity_report(const ConformalSurface& surface,
                                               const LambdaField& lambda, int n_boundary) {
  if (n_boundary < 8)
    throw std::invalid_argument("strict_lambda_convexity_report: need at least 8 samples");
  ConvexityReport rep;
  rep.min_margin = std::numeric_limits<double>::infinity();
  const double r = surface.radius();
  for (int j = 0; j < n_boundary; ++j) {
    const double beta = kTwoPi * j / n_boundary;
    const PlanePoint b{r * std::cos(beta), r * std::sin(beta)};
    const double pi_b = second_fundamental_form(surface, b, beta + 0.5 * kPi);
    for (double side : {1.0, -1.0}) {
      const double theta = wrap_angle(beta + side * 0.5 * kPi);
      // <iv, nu>_g = sin(theta - beta) = side for the two tangents.
      const double margin = pi_b + lambda.value(b.x, b.y, theta) * side;
      ++rep.samples;
      if (margin < rep.min_margin) {
        rep.min_margin = margin;
        rep.witness = PhaseState{b.x, b.y, theta};
      }
    }
  }
  return rep;
}

}  // namespace twistray
