#pragma once

#include <map>
#include <vector>

#include "twistray/poly_field.hpp"
#include "twistray/types.hpp"

namespace twistray {

/// The twist lambda(x, v) = sum_k c_k(x) e^{ik theta}, |k| <= m.
///
/// Real-valuedness requires c_{-k} = conj(c_k); the named constructors
/// produce real fields, from_modes accepts anything and reality_defect()
/// reports the defect on samples.
class LambdaField {
 public:
  using Modes = std::map<int, PolyField<cplx>>;

  LambdaField() = default;  // lambda = 0, the geodesic case
  explicit LambdaField(Modes modes);

  static LambdaField constant(double c);
  static LambdaField magnetic(const PolyField<double>& b);
  /// Thermostat twist a(x) e^{i theta} + conj(a(x)) e^{-i theta}.
  static LambdaField thermostat(const PolyField<cplx>& a);
  static LambdaField from_modes(Modes modes) { return LambdaField(std::move(modes)); }

  const Modes& modes() const { return modes_; }
  int degree() const;
  bool is_magnetic() const { return degree() == 0; }
  bool is_thermostat() const;

  /// Real part of the mode sum at (x, y, theta).
  double value(double x, double y, double theta) const;
  double operator()(const PhaseState& s) const { return value(s.x, s.y, s.theta); }

  /// Mode values c_k(x, y).
  std::map<int, cplx> mode_values(double x, double y) const;

  /// max |c_{-k} - conj(c_k)| over the given base points.
  double reality_defect(const std::vector<PlanePoint>& points) const;

  /// Twist of the time-reversed flow: lambda~(x, v) = -lambda(x, -v), i.e.
  /// mode k multiplied by -(-1)^k.
  LambdaField reversed() const;

  LambdaField scaled(double s) const;

 private:
  Modes modes_;
};

}  // namespace twistray
