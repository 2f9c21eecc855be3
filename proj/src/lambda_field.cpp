#include "twistray/lambda_field.hpp"

#include <algorithm>
#include <cstdlib>

namespace twistray {

LambdaField::LambdaField(Modes modes) : modes_(std::move(modes)) {
  for (auto it = modes_.begin(); it != modes_.end();) {
    if (it->second.rows() != 1 || it->second.cols() != 1)
      throw std::invalid_argument("LambdaField: mode coefficients must be scalar");
    if (it->second.is_zero())
      it = modes_.erase(it);
    else
      ++it;
  }
}

LambdaField LambdaField::constant(double c) {
  return LambdaField(Modes{{0, PolyField<cplx>::scalar(cplx(c))}});
}

LambdaField LambdaField::magnetic(const PolyField<double>& b) {
  return LambdaField(Modes{{0, complexify(b)}});
}

LambdaField LambdaField::thermostat(const PolyField<cplx>& a) {
  return LambdaField(Modes{{1, a}, {-1, a.conj()}});
}

int LambdaField::degree() const {
  int m = 0;
  for (const auto& [k, c] : modes_) m = std::max(m, std::abs(k));
  return m;
}

bool LambdaField::is_thermostat() const {
  if (modes_.empty()) return false;
  return std::all_of(modes_.begin(), modes_.end(),
                     [](const auto& kv) { return std::abs(kv.first) == 1; });
}

double LambdaField::value(double x, double y, double theta) const {
  double v = 0.0;
  for (const auto& [k, c] : modes_) {
    const cplx ck = c.value(x, y)(0, 0);
    if (k == 0)
      v += ck.real();
    else
      v += (ck * std::polar(1.0, k * theta)).real();
  }
  return v;
}

std::map<int, cplx> LambdaField::mode_values(double x, double y) const {
  std::map<int, cplx> out;
  for (const auto& [k, c] : modes_) out[k] = c.value(x, y)(0, 0);
  return out;
}

double LambdaField::reality_defect(const std::vector<PlanePoint>& points) const {
  double worst = 0.0;
  for (const auto& p : points) {
    auto mv = mode_values(p.x, p.y);
    for (const auto& [k, c] : mv) {
      auto it = mv.find(-k);
      const cplx partner = it == mv.end() ? cplx(0.0) : it->second;
      worst = std::max(worst, std::abs(partner - std::conj(c)));
    }
  }
  return worst;
}

LambdaField LambdaField::reversed() const {
  Modes out;
  for (const auto& [k, c] : modes_) {
    const double sign = (k % 2 == 0) ? -1.0 : 1.0;
    out.emplace(k, cplx(sign) * c);
  }
  return LambdaField(std::move(out));
}

LambdaField LambdaField::scaled(double s) const {
  Modes out;
  for (const auto& [k, c] : modes_) out.emplace(k, cplx(s) * c);
  return LambdaField(std::move(out));
}

}  // namespace twistray
