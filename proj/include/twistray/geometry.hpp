#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "twistray/lambda_field.hpp"
#include "twistray/poly_field.hpp"
#include "twistray/types.hpp"

namespace twistray {

/// phi and its partials up to second order at a point.
struct PhiJet {
  double value = 0, dx = 0, dy = 0, dxx = 0, dxy = 0, dyy = 0;
};

/// Round disk of the given radius with metric g = e^{2 phi} (dx^2 + dy^2).
class ConformalSurface {
 public:
  ConformalSurface() : ConformalSurface(PolyField<double>::scalar(0.0), 1.0) {}
  ConformalSurface(PolyField<double> phi, double radius);

  static ConformalSurface flat(double radius = 1.0) {
    return ConformalSurface(PolyField<double>::scalar(0.0), radius);
  }

  const PolyField<double>& phi() const { return phi_; }
  double radius() const { return radius_; }
  double diameter() const { return 2.0 * radius_; }

  double phi_value(double x, double y) const;
  PhiJet phi_jet(double x, double y) const;
  /// phi, phi_x, phi_y only.
  PhiJet phi_first_jet(double x, double y) const;

  /// Boundary defining function r^2 - x^2 - y^2.
  double rho(double x, double y) const { return radius_ * radius_ - x * x - y * y; }

  /// g(a, b) for plane vectors a, b at p.
  double inner(const PlanePoint& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) const;

  /// The plane vector v = e^{-phi}(cos theta, sin theta) attached to s.
  Eigen::Vector2d unit_vector(const PhaseState& s) const;

  /// Same phi on a disk of another radius.
  ConformalSurface with_radius(double r) const { return ConformalSurface(phi_, r); }

 private:
  PolyField<double> phi_;
  double radius_;
};

/// K = -e^{-2 phi} (phi_xx + phi_yy).
double gaussian_curvature(const ConformalSurface& surface, const PlanePoint& p);

enum class FrameVector { X, Xperp, V };

/// Value, gradient and Hessian of a function on SM in (x, y, theta).
struct SMJet {
  cplx value{};
  Eigen::Vector3cd grad = Eigen::Vector3cd::Zero();
  Eigen::Matrix3cd hess = Eigen::Matrix3cd::Zero();
};

using TestFunction = std::function<SMJet(const PhaseState&)>;

/// Angular factor g(theta) with its first two derivatives.
struct AngularJet {
  cplx value, d1, d2;
};
using AngularFactor = std::function<AngularJet(double)>;

namespace angular {
AngularFactor exp_mode(int k);
AngularFactor cos_mode(int k);
AngularFactor sin_mode(int k);
AngularFactor linear();  // g(theta) = theta
}  // namespace angular

/// u(x, y, theta) = c(x, y) g(theta).
TestFunction separable_test_function(const PolyField<cplx>& c, AngularFactor g);

/// Coordinate coefficients of a frame vector and their Jacobian,
/// jacobian(i, j) = d coeff_i / d z_j with z = (x, y, theta).
struct FrameCoefficients {
  Eigen::Vector3d coeff = Eigen::Vector3d::Zero();
  Eigen::Matrix3d jacobian = Eigen::Matrix3d::Zero();
};

FrameCoefficients frame_coefficients(const ConformalSurface& surface, FrameVector tag,
                                     const PhaseState& s);

/// (W u)(s) for the chosen frame vector.
cplx frame_apply(const ConformalSurface& surface, FrameVector tag, const TestFunction& u,
                 const PhaseState& s);

/// (W1 (W2 u) - W2 (W1 u))(s) from first and second derivatives of u.
cplx bracket_apply(const ConformalSurface& surface, FrameVector w1, FrameVector w2,
                   const TestFunction& u, const PhaseState& s);

struct StructureResidual {
  double x_v = 0.0;      // |([X,V] - Xperp) u|
  double xperp_v = 0.0;  // |([Xperp,V] + X) u|
  double x_xperp = 0.0;  // |([X,Xperp] + K V) u|
  double max() const { return std::max({x_v, xperp_v, x_xperp}); }
};

StructureResidual check_structure_equations(const ConformalSurface& surface,
                                            const TestFunction& u,
                                            const std::vector<PhaseState>& samples);

/// Sasaki inner product of two tangent vectors of SM at s, in (x, y, theta)
/// coordinates.
double sasaki_inner(const ConformalSurface& surface, const PhaseState& s,
                    const Eigen::Vector3d& a, const Eigen::Vector3d& b);

/// Angle of the boundary point b, atan2(y, x).
inline double boundary_angle(const PlanePoint& b) { return std::atan2(b.y, b.x); }

/// <v, nu>_g for the inward unit normal nu at the base point of s, taken
/// at the nearest boundary direction: -cos(theta - beta).
double normal_component(const PhaseState& s);

/// Pi_b(v, v) for the inward normal; v is given by its angle theta.
double second_fundamental_form(const ConformalSurface& surface, const PlanePoint& b,
                               double theta);

struct ConvexityReport {
  double min_margin = 0.0;
  PhaseState witness;
  int samples = 0;
  bool convex() const { return min_margin > 0.0; }
};

/// Minimum of Pi(v,v) + <lambda(b,v) iv, nu> over n_boundary equally spaced
/// boundary points and both unit tangents.
ConvexityReport strict_lambda_convexity_report(const ConformalSurface& surface,
                                               const LambdaField& lambda, int n_boundary);

}  // namespace twistray
