#include "twistray/matrix_loop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace twistray {

std::map<int, Mat> dft_modes(const std::vector<Mat>& samples) {
  const int n = static_cast<int>(samples.size());
  if (n == 0) throw std::invalid_argument("dft_modes: no samples");
  const auto rows = samples.front().rows(), cols = samples.front().cols();
  std::map<int, Mat> modes;
  for (int j = 0; j < n; ++j) modes[j < n / 2 ? j : j - n] = Mat::Zero(rows, cols);
  Eigen::FFT<double> fft;
  std::vector<cplx> in(n), out(n);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      for (int j = 0; j < n; ++j) in[j] = samples[j](r, c);
      fft.fwd(out, in);
      for (int j = 0; j < n; ++j) modes[j < n / 2 ? j : j - n](r, c) = out[j] / double(n);
    }
  return modes;
}

std::vector<Mat> modes_to_samples(const std::map<int, Mat>& modes, int n_grid, int rows,
                                  int cols) {
  std::vector<Mat> out(n_grid, Mat::Zero(rows, cols));
  Eigen::FFT<double> fft;
  std::vector<cplx> spec(n_grid), vals(n_grid);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      std::fill(spec.begin(), spec.end(), cplx(0.0));
      for (const auto& [k, m] : modes) {
        const int idx = ((k % n_grid) + n_grid) % n_grid;
        spec[idx] += m(r, c);
      }
      fft.inv(vals, spec);
      for (int j = 0; j < n_grid; ++j) out[j](r, c) = vals[j] * double(n_grid);
    }
  return out;
}

MatrixLoop::MatrixLoop(int n, int k_trunc)
    : n_(n), k_(k_trunc), coeffs_(2 * k_trunc + 1, Mat::Zero(n, n)) {}

MatrixLoop MatrixLoop::constant(const Mat& m, int k_trunc) {
  MatrixLoop l(static_cast<int>(m.rows()), k_trunc);
  l.coeff(0) = m;
  return l;
}

MatrixLoop MatrixLoop::from_samples(const std::vector<Mat>& samples, int k_trunc) {
  const int n_grid = static_cast<int>(samples.size());
  if (2 * k_trunc >= n_grid)
    throw std::invalid_argument("MatrixLoop::from_samples: grid too coarse for the truncation");
  const auto modes = dft_modes(samples);
  MatrixLoop l(static_cast<int>(samples.front().rows()), k_trunc);
  for (int k = -k_trunc; k <= k_trunc; ++k) l.coeff(k) = modes.at(k);
  return l;
}

Mat MatrixLoop::evaluate(double theta) const {
  Mat v = Mat::Zero(n_, n_);
  for (int k = -k_; k <= k_; ++k) v += std::polar(1.0, k * theta) * coeff(k);
  return v;
}

std::vector<Mat> MatrixLoop::sample(int n_grid) const {
  std::map<int, Mat> modes;
  for (int k = -k_; k <= k_; ++k) modes.emplace(k, coeff(k));
  return modes_to_samples(modes, n_grid, n_, n_);
}

MatrixLoop MatrixLoop::adjoint() const {
  MatrixLoop a(n_, k_);
  for (int k = -k_; k <= k_; ++k) a.coeff(k) = coeff(-k).adjoint();
  return a;
}

double MatrixLoop::total_energy() const {
  double e = 0.0;
  for (const auto& c : coeffs_) e += c.squaredNorm();
  return e;
}

double MatrixLoop::negative_energy() const {
  double e = 0.0;
  for (int k = -k_; k < 0; ++k) e += energy(k);
  return e;
}

double MatrixLoop::tail_ratio() const {
  const double total = total_energy();
  if (total == 0.0) return 0.0;
  double tail = 0.0;
  for (int k = -k_; k <= k_; ++k)
    if (4 * std::abs(k) > 3 * k_) tail += energy(k);
  return tail / total;
}

double MatrixLoop::min_abs_det(int n_grid) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& v : sample(n_grid)) m = std::min(m, std::abs(v.determinant()));
  return m;
}

int det_winding(const MatrixLoop& m, int n_grid) {
  const auto vals = m.sample(n_grid);
  double total = 0.0;
  cplx prev = vals.back().determinant();
  for (const auto& v : vals) {
    const cplx d = v.determinant();
    total += std::arg(d / prev);
    prev = d;
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

}  // namespace twistray
