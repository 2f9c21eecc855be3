#include "twistray/fiber_fourier.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "twistray/errors.hpp"
#include "twistray/matrix_loop.hpp"

namespace twistray {
namespace {

void accumulate(ModeValues& out, int k, const Mat& m) {
  auto it = out.find(k);
  if (it == out.end())
    out.emplace(k, m);
  else
    it->second += m;
}

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

FiberFunction::FiberFunction(Modes modes) : modes_(std::move(modes)) {
  if (modes_.empty()) {
    rows_ = cols_ = 1;
    return;
  }
  rows_ = modes_.begin()->second.rows();
  cols_ = modes_.begin()->second.cols();
  for (const auto& [k, c] : modes_)
    if (c.rows() != rows_ || c.cols() != cols_)
      throw DimensionMismatch("FiberFunction: mode coefficients differ in shape");
}

FiberFunction FiberFunction::mode(int k, const MatrixField& c) { return FiberFunction(Modes{{k, c}}); }

FiberFunction FiberFunction::from_lambda(const LambdaField& lambda) {
  Modes m;
  for (const auto& [k, c] : lambda.modes()) m.emplace(k, MatrixField(c));
  if (m.empty()) return FiberFunction(1, 1);
  return FiberFunction(std::move(m));
}

int FiberFunction::degree() const {
  int d = 0;
  for (const auto& [k, c] : modes_) d = std::max(d, std::abs(k));
  return d;
}

Mat FiberFunction::value(double x, double y, double theta) const {
  Mat v = Mat::Zero(rows_, cols_);
  for (const auto& [k, c] : modes_) v += std::polar(1.0, k * theta) * c.value(x, y);
  return v;
}

ModeValues FiberFunction::mode_values(double x, double y) const {
  ModeValues out;
  for (const auto& [k, c] : modes_) accumulate(out, k, c.value(x, y));
  return out;
}

FiberFunction FiberFunction::conj() const {
  Modes m;
  for (const auto& [k, c] : modes_) m.emplace(-k, twistray::conj(c));
  FiberFunction f(rows_, cols_);
  f.modes_ = std::move(m);
  return f;
}

FiberFunction FiberFunction::vertical() const {
  FiberFunction f(rows_, cols_);
  for (const auto& [k, c] : modes_) f.modes_.emplace(k, cplx(0.0, k) * c);
  return f;
}

FiberFunction& FiberFunction::operator+=(const FiberFunction& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_)
    throw DimensionMismatch("FiberFunction sum: shape mismatch");
  for (const auto& [k, c] : o.modes_) {
    auto it = modes_.find(k);
    if (it == modes_.end())
      modes_.emplace(k, c);
    else
      it->second = it->second + c;
  }
  return *this;
}

FiberFunction operator+(FiberFunction a, const FiberFunction& b) {
  a += b;
  return a;
}

FiberFunction operator*(const FiberFunction& a, const FiberFunction& b) {
  FiberFunction out;
  bool first = true;
  for (const auto& [j, ca] : a.modes())
    for (const auto& [k, cb] : b.modes()) {
      FiberFunction term = FiberFunction::mode(j + k, ca * cb);
      if (first) {
        out = term;
        first = false;
      } else {
        out += term;
      }
    }
  return out;
}

ModeDecomposition decompose(const std::vector<Mat>& samples) {
  const std::size_t n = samples.size();
  if (!is_power_of_two(n) || n < 4)
    throw std::invalid_argument("decompose: grid size must be a power of two >= 4");
  ModeDecomposition d;
  d.modes = dft_modes(samples);
  double mode_energy = 0.0, high = 0.0, grid_mean = 0.0;
  for (const auto& [k, m] : d.modes) {
    const double e = m.squaredNorm();
    mode_energy += e;
    if (8 * static_cast<std::size_t>(std::abs(k)) >= 3 * n) high += e;
  }
  for (const auto& s : samples) grid_mean += s.squaredNorm();
  grid_mean /= double(n);
  d.parseval_defect = std::abs(mode_energy - grid_mean);
  if (high > 1e-8 * mode_energy)
    throw AliasingSuspected("decompose: " + std::to_string(high / mode_energy) +
                            " of the energy sits in |k| >= 3N/8");
  return d;
}

std::vector<Mat> fiber_samples(const FiberFunction& w, double x, double y, int n_theta) {
  std::vector<Mat> out;
  out.reserve(n_theta);
  for (int j = 0; j < n_theta; ++j) out.push_back(w.value(x, y, kTwoPi * j / n_theta));
  return out;
}

FiberFunction holomorphic_project(const FiberFunction& w, Half half) {
  FiberFunction::Modes m;
  for (const auto& [k, c] : w.modes())
    if (half == Half::Positive ? k >= 0 : k <= 0) m.emplace(k, c);
  if (m.empty()) return FiberFunction(w.rows(), w.cols());
  return FiberFunction(std::move(m));
}

ModeValues holomorphic_project(const ModeValues& w, Half half) {
  ModeValues out;
  for (const auto& [k, c] : w)
    if (half == Half::Positive ? k >= 0 : k <= 0) out.emplace(k, c);
  return out;
}

ModeValues apply_x(const ConformalSurface& surface, const FiberFunction& w, const PlanePoint& p) {
  // X = e^{-phi}(cos th d_x + sin th d_y + (-phi_x sin th + phi_y cos th) d_th)
  // sends c e^{ik th} to
  //   (e^{-phi}/2)[(d_x - i d_y)c - k(phi_x - i phi_y)c] e^{i(k+1)th}
  // + (e^{-phi}/2)[(d_x + i d_y)c + k(phi_x + i phi_y)c] e^{i(k-1)th}.
  const PhiJet ph = surface.phi_first_jet(p.x, p.y);
  const double half_e = 0.5 * std::exp(-ph.value);
  const cplx i(0.0, 1.0);
  const cplx dphi_minus(ph.dx, -ph.dy), dphi_plus(ph.dx, ph.dy);
  ModeValues out;
  for (const auto& [k, c] : w.modes()) {
    const FieldJet j = c.jet(p.x, p.y);
    accumulate(out, k + 1, half_e * (j.dx - i * j.dy - cplx(k) * dphi_minus * j.value));
    accumulate(out, k - 1, half_e * (j.dx + i * j.dy + cplx(k) * dphi_plus * j.value));
  }
  return out;
}

ModeValues apply_generator(const TwistedDisk& disk, const FiberFunction& w, const PlanePoint& p) {
  ModeValues out = apply_x(disk.surface, w, p);
  const auto lam = disk.lambda.mode_values(p.x, p.y);
  // lambda V w: mode j + k receives lambda_j (ik) c_k; k = 0 contributes an
  // exact zero.
  for (const auto& [j, lj] : lam)
    for (const auto& [k, c] : w.modes()) accumulate(out, j + k, lj * cplx(0.0, k) * c.value(p.x, p.y));
  return out;
}

LeakageReport mapping_property_check(const TwistedDisk& disk, const FiberFunction& w,
                                     const std::vector<PlanePoint>& grid) {
  if (disk.lambda.degree() > 2)
    throw DegreeViolation("mapping_property_check: lambda has degree " +
                          std::to_string(disk.lambda.degree()) + " > 2");
  for (const auto& [k, c] : w.modes())
    if (k < 0) throw std::invalid_argument("mapping_property_check: w has a negative mode");
  LeakageReport rep;
  for (const auto& p : grid) {
    double leak = 0.0;
    for (const auto& [k, m] : apply_generator(disk, w, p))
      if (k <= -2) leak += m.norm();
    if (leak >= rep.leakage) {
      rep.leakage = leak;
      rep.worst = p;
    }
  }
  return rep;
}

ObstructionWitness obstruction_demo(const TwistedDisk& disk, const PlanePoint& point,
                                    const MatrixField& c) {
  if (disk.lambda.degree() < 3)
    throw DegreeViolation("obstruction_demo: lambda has no mode of order 3 or higher");
  const FiberFunction w = FiberFunction::mode(1, c);
  const ModeValues out = apply_generator(disk, w, point);
  ObstructionWitness wit;
  wit.point = point;
  const auto it = out.find(-2);
  if (it != out.end()) {
    wit.coefficient = it->second(0, 0);
    wit.magnitude = it->second.norm();
  }
  return wit;
}

SkewDegreeReport skew_hermitian_degree_check(const ModeValues& b, int m, int n_theta) {
  SkewDegreeReport rep;
  if (b.empty()) return rep;
  const int rows = static_cast<int>(b.begin()->second.rows());
  const int cols = static_cast<int>(b.begin()->second.cols());
  for (const auto& v : modes_to_samples(b, n_theta, rows, cols))
    rep.skew_defect = std::max(rep.skew_defect, (v + v.adjoint()).norm());
  for (const auto& [k, c] : b)
    if (std::abs(k) > m) rep.out_of_band += c.squaredNorm();
  return rep;
}

nlohmann::json mode_energy_json(const ModeValues& modes) {
  nlohmann::json energies = nlohmann::json::object();
  double total = 0.0;
  for (const auto& [k, c] : modes) {
    energies[std::to_string(k)] = c.squaredNorm();
    total += c.squaredNorm();
  }
  return {{"modes", energies}, {"total", total}};
}

}  // namespace twistray
