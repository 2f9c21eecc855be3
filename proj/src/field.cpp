#include "twistray/field.hpp"

#include <stdexcept>

namespace twistray {
namespace {

class PolyNode final : public MatrixField::Node {
 public:
  explicit PolyNode(PolyField<cplx> p)
      : Node(p.rows(), p.cols()), poly_(std::move(p)) {}
  Mat value(double x, double y) const override { return poly_.value(x, y); }
  FieldJet jet(double x, double y) const override {
    auto j = poly_.first_jet(x, y);
    return {j.value, j.dx, j.dy};
  }

 private:
  PolyField<cplx> poly_;
};

class ConstantNode final : public MatrixField::Node {
 public:
  explicit ConstantNode(Mat c)
      : Node(static_cast<int>(c.rows()), static_cast<int>(c.cols())), c_(std::move(c)) {}
  Mat value(double, double) const override { return c_; }
  FieldJet jet(double, double) const override {
    Mat z = Mat::Zero(c_.rows(), c_.cols());
    return {c_, z, z};
  }

 private:
  Mat c_;
};

class CallableNode final : public MatrixField::Node {
 public:
  CallableNode(int r, int c, std::function<FieldJet(double, double)> f)
      : Node(r, c), f_(std::move(f)) {}
  Mat value(double x, double y) const override { return f_(x, y).value; }
  FieldJet jet(double x, double y) const override { return f_(x, y); }

 private:
  std::function<FieldJet(double, double)> f_;
};

class SumNode final : public MatrixField::Node {
 public:
  SumNode(MatrixField a, MatrixField b, double sign)
      : Node(a.rows(), a.cols()), a_(std::move(a)), b_(std::move(b)), sign_(sign) {}
  Mat value(double x, double y) const override {
    return a_.value(x, y) + cplx(sign_) * b_.value(x, y);
  }
  FieldJet jet(double x, double y) const override {
    FieldJet ja = a_.jet(x, y), jb = b_.jet(x, y);
    return {ja.value + cplx(sign_) * jb.value, ja.dx + cplx(sign_) * jb.dx,
            ja.dy + cplx(sign_) * jb.dy};
  }

 private:
  MatrixField a_, b_;
  double sign_;
};

class ProductNode final : public MatrixField::Node {
 public:
  ProductNode(MatrixField a, MatrixField b, bool scalar_left)
      : Node(scalar_left ? b.rows() : a.rows(), b.cols()),
        a_(std::move(a)),
        b_(std::move(b)),
        scalar_left_(scalar_left) {}
  Mat value(double x, double y) const override {
    if (scalar_left_) return a_.value(x, y)(0, 0) * b_.value(x, y);
    return a_.value(x, y) * b_.value(x, y);
  }
  FieldJet jet(double x, double y) const override {
    FieldJet ja = a_.jet(x, y), jb = b_.jet(x, y);
    if (scalar_left_) {
      const cplx s = ja.value(0, 0);
      return {s * jb.value, ja.dx(0, 0) * jb.value + s * jb.dx,
              ja.dy(0, 0) * jb.value + s * jb.dy};
    }
    return {ja.value * jb.value, ja.dx * jb.value + ja.value * jb.dx,
            ja.dy * jb.value + ja.value * jb.dy};
  }

 private:
  MatrixField a_, b_;
  bool scalar_left_;
};

class ScaleNode final : public MatrixField::Node {
 public:
  ScaleNode(cplx s, MatrixField a) : Node(a.rows(), a.cols()), s_(s), a_(std::move(a)) {}
  Mat value(double x, double y) const override { return s_ * a_.value(x, y); }
  FieldJet jet(double x, double y) const override {
    FieldJet j = a_.jet(x, y);
    return {s_ * j.value, s_ * j.dx, s_ * j.dy};
  }

 private:
  cplx s_;
  MatrixField a_;
};

class InverseNode final : public MatrixField::Node {
 public:
  explicit InverseNode(MatrixField a) : Node(a.rows(), a.cols()), a_(std::move(a)) {}
  Mat value(double x, double y) const override {
    return a_.value(x, y).partialPivLu().inverse();
  }
  FieldJet jet(double x, double y) const override {
    FieldJet j = a_.jet(x, y);
    Mat inv = j.value.partialPivLu().inverse();
    return {inv, -inv * j.dx * inv, -inv * j.dy * inv};
  }

 private:
  MatrixField a_;
};

class ConjNode final : public MatrixField::Node {
 public:
  explicit ConjNode(MatrixField a) : Node(a.rows(), a.cols()), a_(std::move(a)) {}
  Mat value(double x, double y) const override { return a_.value(x, y).conjugate(); }
  FieldJet jet(double x, double y) const override {
    FieldJet j = a_.jet(x, y);
    return {j.value.conjugate(), j.dx.conjugate(), j.dy.conjugate()};
  }

 private:
  MatrixField a_;
};

class VecNode final : public MatrixField::Node {
 public:
  explicit VecNode(MatrixField a) : Node(a.rows() * a.cols(), 1), a_(std::move(a)) {
    if (a_.rows() * a_.cols() > kMaxDim)
      throw std::invalid_argument("vectorized: result exceeds the bounded dimension");
  }
  Mat value(double x, double y) const override { return vec(a_.value(x, y)); }
  FieldJet jet(double x, double y) const override {
    FieldJet j = a_.jet(x, y);
    return {vec(j.value), vec(j.dx), vec(j.dy)};
  }

 private:
  MatrixField a_;
};

class CommutatorNode final : public MatrixField::Node {
 public:
  CommutatorNode(MatrixField a, MatrixField b)
      : Node(a.rows() * a.rows(), a.rows() * a.rows()), a_(std::move(a)), b_(std::move(b)) {}
  Mat value(double x, double y) const override {
    return build(a_.value(x, y), b_.value(x, y));
  }
  FieldJet jet(double x, double y) const override {
    FieldJet ja = a_.jet(x, y), jb = b_.jet(x, y);
    return {build(ja.value, jb.value), build(ja.dx, jb.dx), build(ja.dy, jb.dy)};
  }

 private:
  static Mat build(const Mat& a, const Mat& b) {
    const int n = static_cast<int>(a.rows());
    return kron(identity(n), a) - kron(b.transpose(), identity(n));
  }
  MatrixField a_, b_;
};

}  // namespace

MatrixField::MatrixField() : MatrixField(zero(1, 1)) {}

MatrixField::MatrixField(const PolyField<cplx>& p)
    : node_(std::make_shared<PolyNode>(p)) {}

MatrixField MatrixField::zero(int rows, int cols) {
  return constant(Mat::Zero(rows, cols));
}

MatrixField MatrixField::constant(const Mat& c) {
  return MatrixField(std::make_shared<ConstantNode>(c));
}

MatrixField MatrixField::identity(int n) { return constant(twistray::identity(n)); }

MatrixField MatrixField::from_callable(int rows, int cols,
                                       std::function<FieldJet(double, double)> f) {
  return MatrixField(std::make_shared<CallableNode>(rows, cols, std::move(f)));
}

MatrixField operator+(const MatrixField& a, const MatrixField& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("field sum: shape mismatch");
  return MatrixField(std::make_shared<SumNode>(a, b, 1.0));
}

MatrixField operator-(const MatrixField& a, const MatrixField& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("field difference: shape mismatch");
  return MatrixField(std::make_shared<SumNode>(a, b, -1.0));
}

MatrixField operator*(const MatrixField& a, const MatrixField& b) {
  const bool scalar_left = a.rows() == 1 && a.cols() == 1 && b.rows() != 1;
  if (!scalar_left && a.cols() != b.rows())
    throw std::invalid_argument("field product: shape mismatch");
  return MatrixField(std::make_shared<ProductNode>(a, b, scalar_left));
}

MatrixField operator*(cplx s, const MatrixField& a) {
  return MatrixField(std::make_shared<ScaleNode>(s, a));
}

MatrixField inverse(const MatrixField& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("inverse: field not square");
  return MatrixField(std::make_shared<InverseNode>(a));
}

MatrixField conj(const MatrixField& a) { return MatrixField(std::make_shared<ConjNode>(a)); }

MatrixField vectorized(const MatrixField& a) {
  return MatrixField(std::make_shared<VecNode>(a));
}

MatrixField commutator_operator(const MatrixField& a, const MatrixField& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw std::invalid_argument("commutator_operator: shape mismatch");
  if (a.rows() * a.rows() > kMaxDim)
    throw std::invalid_argument("commutator_operator: n^2 exceeds the bounded dimension");
  return MatrixField(std::make_shared<CommutatorNode>(a, b));
}

Mat kron(const Mat& a, const Mat& b) {
  const auto ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  Mat k(ar * br, ac * bc);
  for (Eigen::Index i = 0; i < ar; ++i)
    for (Eigen::Index j = 0; j < ac; ++j) k.block(i * br, j * bc, br, bc) = a(i, j) * b;
  return k;
}

Mat vec(const Mat& a) {
  Mat v(a.rows() * a.cols(), 1);
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) v(j * a.rows() + i, 0) = a(i, j);
  return v;
}

Mat unvec(const Mat& v, int rows, int cols) {
  Mat a(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) a(i, j) = v(j * rows + i, 0);
  return a;
}

}  // namespace twistray
