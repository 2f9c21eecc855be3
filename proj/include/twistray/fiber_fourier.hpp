#pragma once

#include <map>
#include <vector>

#include <json.hpp>

#include "twistray/field.hpp"
#include "twistray/flow.hpp"
#include "twistray/lambda_field.hpp"

namespace twistray {

/// Mode values at one base point: k -> c_k(x).
using ModeValues = std::map<int, Mat>;

/// w(x, v) = sum_k c_k(x) e^{ik theta} with matrix-valued coefficient fields
/// of a common shape (n x 1 vectors, n x n matrices, or scalars).
class FiberFunction {
 public:
  using Modes = std::map<int, MatrixField>;

  FiberFunction(int rows = 1, int cols = 1) : rows_(rows), cols_(cols) {}
  explicit FiberFunction(Modes modes);

  /// A single mode c(x) e^{ik theta}.
  static FiberFunction mode(int k, const MatrixField& c);
  /// The twist as a scalar fiber function.
  static FiberFunction from_lambda(const LambdaField& lambda);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const Modes& modes() const { return modes_; }
  /// max |k| over the stored modes.
  int degree() const;

  Mat value(double x, double y, double theta) const;
  ModeValues mode_values(double x, double y) const;

  /// Entrywise complex conjugate: c_k -> conj(c_k) moved to mode -k.
  FiberFunction conj() const;
  /// V w = sum ik c_k e^{ik theta}.
  FiberFunction vertical() const;

  FiberFunction& operator+=(const FiberFunction& o);

 private:
  int rows_, cols_;
  Modes modes_;
};

FiberFunction operator+(FiberFunction a, const FiberFunction& b);
/// Pointwise product: convolution of the mode lists.
FiberFunction operator*(const FiberFunction& a, const FiberFunction& b);

struct ModeDecomposition {
  ModeValues modes;
  double parseval_defect = 0.0;  // |sum |u_k|^2 - mean |u|^2|
};

/// Discrete Fourier coefficients of samples on the grid theta_j = 2 pi j / N.
/// N must be a power of two; AliasingSuspected when |k| >= 3N/8 carries more
/// than 1e-8 of the energy.
ModeDecomposition decompose(const std::vector<Mat>& samples);

/// Samples of w over an N-point fiber grid at (x, y).
std::vector<Mat> fiber_samples(const FiberFunction& w, double x, double y, int n_theta);

enum class Half { Positive, Negative };

/// Keeps the modes k >= 0 (Positive) or k <= 0 (Negative).
FiberFunction holomorphic_project(const FiberFunction& w, Half half);
ModeValues holomorphic_project(const ModeValues& w, Half half);

/// Mode values of (X + lambda V) w at the base point p, by exact mode
/// arithmetic on the coefficient jets.
ModeValues apply_generator(const TwistedDisk& disk, const FiberFunction& w, const PlanePoint& p);

/// The X part alone.
ModeValues apply_x(const ConformalSurface& surface, const FiberFunction& w, const PlanePoint& p);

struct LeakageReport {
  double leakage = 0.0;  // max over the grid of sum_{k <= -2} |((X+lambda V)w)_k|_F
  PlanePoint worst;
};

/// Requires deg lambda <= 2 (DegreeViolation otherwise) and w with modes
/// k >= 0 only.
LeakageReport mapping_property_check(const TwistedDisk& disk, const FiberFunction& w,
                                     const std::vector<PlanePoint>& grid);

struct ObstructionWitness {
  PlanePoint point;
  cplx coefficient;  // mode -2 of (X + lambda V)(c e^{i theta}), top-left entry
  double magnitude = 0.0;
};

/// For deg lambda >= 3 exhibits w = c(x) e^{i theta} leaking into mode -2.
/// DegreeViolation when lambda has no mode of order 3 or higher.
ObstructionWitness obstruction_demo(const TwistedDisk& disk, const PlanePoint& point,
                                    const MatrixField& c = MatrixField::identity(1));

struct SkewDegreeReport {
  double skew_defect = 0.0;     // max over the grid of |B + B^*|_F
  double out_of_band = 0.0;     // sum_{|k| > m} |B_k|_F^2
  bool pass(double tol) const { return skew_defect < tol && out_of_band < tol; }
};

SkewDegreeReport skew_hermitian_degree_check(const ModeValues& b, int m, int n_theta = 256);

/// {"modes": {"k": energy, ...}, "total": ..., plus caller flags}.
nlohmann::json mode_energy_json(const ModeValues& modes);

}  // namespace twistray
