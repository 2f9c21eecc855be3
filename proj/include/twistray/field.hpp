#pragma once

#include <functional>
#include <memory>

#include "twistray/poly_field.hpp"
#include "twistray/types.hpp"

namespace twistray {

/// Value and first partials of a matrix field at a plane point.
struct FieldJet {
  Mat value, dx, dy;
};

/// Complex matrix field on the plane with exact first partials.
///
/// A MatrixField is a cheap handle around an immutable expression node. It
/// is built from polynomials and combined with the free functions below
/// (sum, product, inverse, ...), each of which carries its own derivative
/// rule, so rational expressions such as u^{-1} du keep exact derivatives.
class MatrixField {
 public:
  class Node {
   public:
    Node(int rows, int cols) : rows_(rows), cols_(cols) {}
    virtual ~Node() = default;
    virtual Mat value(double x, double y) const = 0;
    virtual FieldJet jet(double x, double y) const = 0;
    int rows() const { return rows_; }
    int cols() const { return cols_; }

   private:
    int rows_, cols_;
  };

  MatrixField();  // 1x1 zero
  explicit MatrixField(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  MatrixField(const PolyField<cplx>& p);  // NOLINT(implicit)

  static MatrixField zero(int rows, int cols);
  static MatrixField constant(const Mat& c);
  static MatrixField identity(int n);

  /// Wraps an arbitrary callable returning a jet.
  static MatrixField from_callable(int rows, int cols,
                                   std::function<FieldJet(double, double)> f);

  int rows() const { return node_->rows(); }
  int cols() const { return node_->cols(); }

  Mat operator()(double x, double y) const { return node_->value(x, y); }
  Mat value(double x, double y) const { return node_->value(x, y); }
  FieldJet jet(double x, double y) const { return node_->jet(x, y); }

 private:
  std::shared_ptr<const Node> node_;
};

MatrixField operator+(const MatrixField& a, const MatrixField& b);
MatrixField operator-(const MatrixField& a, const MatrixField& b);
/// Matrix product; a 1x1 left factor acts as a scalar multiplier.
MatrixField operator*(const MatrixField& a, const MatrixField& b);
MatrixField operator*(cplx s, const MatrixField& a);

/// Pointwise inverse, derivative -a^{-1} (da) a^{-1}.
MatrixField inverse(const MatrixField& a);
/// Entrywise complex conjugate.
MatrixField conj(const MatrixField& a);
/// Column-major flattening of an n x m field into an nm x 1 field.
MatrixField vectorized(const MatrixField& a);
/// The operator H -> a H - H b acting on column-major vec(H):
/// (I kron a) - (b^T kron I).
MatrixField commutator_operator(const MatrixField& a, const MatrixField& b);

/// Kronecker helpers on plain matrices (shared by the field combinators and
/// by direct evaluation).
Mat kron(const Mat& a, const Mat& b);
Mat vec(const Mat& a);
Mat unvec(const Mat& v, int rows, int cols);

}  // namespace twistray
