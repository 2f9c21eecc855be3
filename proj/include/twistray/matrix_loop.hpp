#pragma once

#include <map>
#include <vector>

#include "twistray/types.hpp"

namespace twistray {

/// Forward DFT of equally spaced samples f(2 pi j / N), returned as mode
/// coefficients u_k = (1/N) sum_j f_j e^{-ik theta_j} for -N/2 < k <= N/2 - 1
/// (k = -N/2 included, N/2 folded onto it).
std::map<int, Mat> dft_modes(const std::vector<Mat>& samples);

/// Inverse of dft_modes on an N-point grid.
std::vector<Mat> modes_to_samples(const std::map<int, Mat>& modes, int n_grid, int rows,
                                  int cols);

/// A map from the fiber circle into n x n complex matrices stored by its
/// Fourier coefficients M_k, |k| <= K.
class MatrixLoop {
 public:
  MatrixLoop() = default;
  MatrixLoop(int n, int k_trunc);

  static MatrixLoop constant(const Mat& m, int k_trunc);
  /// Truncated DFT of samples on an equally spaced grid.
  static MatrixLoop from_samples(const std::vector<Mat>& samples, int k_trunc);

  int n() const { return n_; }
  int k_trunc() const { return k_; }

  Mat& coeff(int k) { return coeffs_[k + k_]; }
  const Mat& coeff(int k) const { return coeffs_[k + k_]; }

  Mat evaluate(double theta) const;
  Mat operator()(double theta) const { return evaluate(theta); }
  /// Values on the N-point grid theta_j = 2 pi j / N.
  std::vector<Mat> sample(int n_grid) const;

  /// Pointwise conjugate transpose: coefficient k becomes (M_{-k})^*.
  MatrixLoop adjoint() const;

  double energy(int k) const { return coeff(k).squaredNorm(); }
  double total_energy() const;
  /// Energy in the modes k < 0.
  double negative_energy() const;
  /// Energy fraction in |k| > 3K/4.
  double tail_ratio() const;
  /// min |det M(theta)| over the grid.
  double min_abs_det(int n_grid) const;

 private:
  int n_ = 0;
  int k_ = 0;
  std::vector<Mat> coeffs_;
};

/// Winding number of theta -> det M(theta) about 0 over an N-point grid.
int det_winding(const MatrixLoop& m, int n_grid);

}  // namespace twistray
