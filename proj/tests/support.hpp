#pragma once

// Hand-rolled generators shared by the property tests.

#include <cstdint>
#include <random>
#include <tuple>
#include <vector>

#include "twistray/poly_field.hpp"
#include "twistray/types.hpp"

namespace twistray::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  cplx complex(double scale) { return {uniform(-scale, scale), uniform(-scale, scale)}; }

  PlanePoint point_in_disk(double radius) {
    const double r = radius * std::sqrt(uniform(0.0, 1.0));
    const double a = uniform(0.0, kTwoPi);
    return {r * std::cos(a), r * std::sin(a)};
  }

  PhaseState state_in_disk(double radius) {
    const PlanePoint p = point_in_disk(radius);
    return {p.x, p.y, uniform(0.0, kTwoPi)};
  }

  std::vector<PhaseState> states(int n, double radius) {
    std::vector<PhaseState> out;
    for (int i = 0; i < n; ++i) out.push_back(state_in_disk(radius));
    return out;
  }

  Mat matrix(int rows, int cols, double scale) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = complex(scale);
    return m;
  }

  Mat skew_hermitian(int n, double scale) {
    Mat m = matrix(n, n, scale);
    return cplx(0.5) * (m - m.adjoint());
  }

  /// Random real polynomial of total degree at most deg.
  PolyField<double> real_poly(int deg, double scale) {
    PolyField<double> p(1, 1);
    for (int i = 0; i <= deg; ++i)
      for (int j = 0; i + j <= deg; ++j) {
        BoundedMatrix<double> c(1, 1);
        c(0, 0) = uniform(-scale, scale);
        p.add_term(i, j, c);
      }
    return p;
  }

  /// Random complex matrix polynomial of total degree at most deg.
  PolyField<cplx> matrix_poly(int rows, int cols, int deg, double scale) {
    PolyField<cplx> p(rows, cols);
    for (int i = 0; i <= deg; ++i)
      for (int j = 0; i + j <= deg; ++j) p.add_term(i, j, matrix(rows, cols, scale));
    return p;
  }

  PolyField<cplx> skew_poly(int n, int deg, double scale) {
    PolyField<cplx> p(n, n);
    for (int i = 0; i <= deg; ++i)
      for (int j = 0; i + j <= deg; ++j) p.add_term(i, j, skew_hermitian(n, scale));
    return p;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline PolyField<double> poly(std::initializer_list<std::tuple<int, int, double>> terms) {
  PolyField<double> p(1, 1);
  for (const auto& [i, j, c] : terms) p += PolyField<double>::scalar_monomial(i, j, c);
  return p;
}

inline PolyField<cplx> cpoly(std::initializer_list<std::tuple<int, int, cplx>> terms) {
  PolyField<cplx> p(1, 1);
  for (const auto& [i, j, c] : terms) p += PolyField<cplx>::scalar_monomial(i, j, c);
  return p;
}

}  // namespace twistray::testing
