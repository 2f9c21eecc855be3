#pragma once

#include <algorithm>
#include <array>
#include <stdexcept>
#include <vector>

#include "twistray/types.hpp"

namespace twistray {

/// Bivariate polynomial p(x, y) = sum c_ij x^i y^j with matrix coefficients.
///
/// Scalar fields are the 1x1 case. Every field is entire, so it restricts
/// to the disk and extends to any engulfing disk without further work, and
/// all partial derivatives are exact.
template <typename Scalar>
class PolyField {
 public:
  using MatrixType = BoundedMatrix<Scalar>;

  static constexpr int kMaxDegree = 24;

  struct Term {
    int px = 0;
    int py = 0;
    MatrixType coeff;
  };

  /// Value together with first partials.
  struct FirstJet {
    MatrixType value, dx, dy;
  };

  /// Value together with first and second partials.
  struct Jet {
    MatrixType value, dx, dy, dxx, dxy, dyy;
  };

  PolyField() : PolyField(1, 1) {}
  PolyField(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1 || rows > kMaxDim || cols > kMaxDim)
      throw std::invalid_argument("PolyField: dimension out of range");
  }

  static PolyField constant(const MatrixType& c) {
    PolyField p(static_cast<int>(c.rows()), static_cast<int>(c.cols()));
    p.add_term(0, 0, c);
    return p;
  }

  static PolyField scalar(Scalar c) {
    MatrixType m(1, 1);
    m(0, 0) = c;
    return constant(m);
  }

  static PolyField monomial(int px, int py, const MatrixType& c) {
    PolyField p(static_cast<int>(c.rows()), static_cast<int>(c.cols()));
    p.add_term(px, py, c);
    return p;
  }

  static PolyField scalar_monomial(int px, int py, Scalar c) {
    MatrixType m(1, 1);
    m(0, 0) = c;
    return monomial(px, py, m);
  }

  /// Adds c x^px y^py, merging with an existing term of the same exponents.
  void add_term(int px, int py, const MatrixType& c) {
    if (px < 0 || py < 0 || px + py > kMaxDegree)
      throw std::invalid_argument("PolyField: exponent out of range");
    if (c.rows() != rows_ || c.cols() != cols_)
      throw std::invalid_argument("PolyField: coefficient shape mismatch");
    for (auto& t : terms_) {
      if (t.px == px && t.py == py) {
        t.coeff += c;
        return;
      }
    }
    terms_.push_back(Term{px, py, c});
    max_exp_ = std::max({max_exp_, px, py});
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<Term>& terms() const { return terms_; }

  int degree() const {
    int d = 0;
    for (const auto& t : terms_)
      if (t.coeff.squaredNorm() > 0) d = std::max(d, t.px + t.py);
    return d;
  }

  bool is_zero() const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const Term& t) { return t.coeff.squaredNorm() == 0; });
  }

  MatrixType value(double x, double y) const {
    Powers pw(x, y, max_exponent());
    MatrixType v = MatrixType::Zero(rows_, cols_);
    for (const auto& t : terms_) v += t.coeff * Scalar(pw.x[t.px] * pw.y[t.py]);
    return v;
  }

  FirstJet first_jet(double x, double y) const {
    Powers pw(x, y, max_exponent());
    FirstJet j{MatrixType::Zero(rows_, cols_), MatrixType::Zero(rows_, cols_),
               MatrixType::Zero(rows_, cols_)};
    for (const auto& t : terms_) {
      j.value += t.coeff * Scalar(pw.x[t.px] * pw.y[t.py]);
      if (t.px > 0) j.dx += t.coeff * Scalar(t.px * pw.x[t.px - 1] * pw.y[t.py]);
      if (t.py > 0) j.dy += t.coeff * Scalar(t.py * pw.x[t.px] * pw.y[t.py - 1]);
    }
    return j;
  }

  Jet jet(double x, double y) const {
    Powers pw(x, y, max_exponent());
    const MatrixType z = MatrixType::Zero(rows_, cols_);
    Jet j{z, z, z, z, z, z};
    for (const auto& t : terms_) {
      const int i = t.px, k = t.py;
      j.value += t.coeff * Scalar(pw.x[i] * pw.y[k]);
      if (i > 0) j.dx += t.coeff * Scalar(i * pw.x[i - 1] * pw.y[k]);
      if (k > 0) j.dy += t.coeff * Scalar(k * pw.x[i] * pw.y[k - 1]);
      if (i > 1) j.dxx += t.coeff * Scalar(i * (i - 1) * pw.x[i - 2] * pw.y[k]);
      if (i > 0 && k > 0) j.dxy += t.coeff * Scalar(i * k * pw.x[i - 1] * pw.y[k - 1]);
      if (k > 1) j.dyy += t.coeff * Scalar(k * (k - 1) * pw.x[i] * pw.y[k - 2]);
    }
    return j;
  }

  PolyField diff_x() const {
    PolyField d(rows_, cols_);
    for (const auto& t : terms_)
      if (t.px > 0) d.add_term(t.px - 1, t.py, t.coeff * Scalar(t.px));
    return d;
  }

  PolyField diff_y() const {
    PolyField d(rows_, cols_);
    for (const auto& t : terms_)
      if (t.py > 0) d.add_term(t.px, t.py - 1, t.coeff * Scalar(t.py));
    return d;
  }

  /// Entrywise complex conjugate (monomials are real).
  PolyField conj() const {
    PolyField c(rows_, cols_);
    for (const auto& t : terms_) c.add_term(t.px, t.py, t.coeff.conjugate());
    return c;
  }

  PolyField adjoint() const {
    PolyField c(cols_, rows_);
    for (const auto& t : terms_) c.add_term(t.px, t.py, t.coeff.adjoint());
    return c;
  }

  PolyField& operator+=(const PolyField& o) {
    for (const auto& t : o.terms_) add_term(t.px, t.py, t.coeff);
    return *this;
  }

  PolyField& operator*=(Scalar s) {
    for (auto& t : terms_) t.coeff *= s;
    return *this;
  }

 private:
  struct Powers {
    std::array<double, kMaxDegree + 1> x{}, y{};
    Powers(double xv, double yv, int n) {
      x[0] = y[0] = 1.0;
      for (int i = 1; i <= n; ++i) {
        x[i] = x[i - 1] * xv;
        y[i] = y[i - 1] * yv;
      }
    }
  };

  int max_exponent() const { return max_exp_; }

  int rows_ = 1;
  int cols_ = 1;
  int max_exp_ = 0;
  std::vector<Term> terms_;
};

template <typename Scalar>
PolyField<Scalar> operator+(PolyField<Scalar> a, const PolyField<Scalar>& b) {
  a += b;
  return a;
}

template <typename Scalar>
PolyField<Scalar> operator-(PolyField<Scalar> a, const PolyField<Scalar>& b) {
  for (const auto& t : b.terms()) a.add_term(t.px, t.py, -t.coeff);
  return a;
}

template <typename Scalar>
PolyField<Scalar> operator*(Scalar s, PolyField<Scalar> p) {
  p *= s;
  return p;
}

/// Matrix product of polynomial fields; a 1x1 left factor acts as a scalar.
template <typename Scalar>
PolyField<Scalar> operator*(const PolyField<Scalar>& a, const PolyField<Scalar>& b) {
  const bool scalar_left = a.rows() == 1 && a.cols() == 1 && b.rows() != 1;
  if (!scalar_left && a.cols() != b.rows())
    throw std::invalid_argument("PolyField product: shape mismatch");
  PolyField<Scalar> out(scalar_left ? b.rows() : a.rows(), b.cols());
  for (const auto& s : a.terms())
    for (const auto& t : b.terms()) {
      if (scalar_left)
        out.add_term(s.px + t.px, s.py + t.py, s.coeff(0, 0) * t.coeff);
      else
        out.add_term(s.px + t.px, s.py + t.py, s.coeff * t.coeff);
    }
  return out;
}

inline PolyField<cplx> complexify(const PolyField<double>& p) {
  PolyField<cplx> c(p.rows(), p.cols());
  for (const auto& t : p.terms()) c.add_term(t.px, t.py, t.coeff.template cast<cplx>());
  return c;
}

/// Boundary defining function rho = r^2 - x^2 - y^2 as a scalar field.
template <typename Scalar>
PolyField<Scalar> defining_function(double radius) {
  PolyField<Scalar> rho = PolyField<Scalar>::scalar(Scalar(radius * radius));
  rho += PolyField<Scalar>::scalar_monomial(2, 0, Scalar(-1.0));
  rho += PolyField<Scalar>::scalar_monomial(0, 2, Scalar(-1.0));
  return rho;
}

}  // namespace twistray
