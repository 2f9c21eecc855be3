#include "twistray/loopfact.hpp"

#include <cmath>
#include <string>

#include "twistray/errors.hpp"
#include "parallel.hpp"

namespace twistray {
namespace {

Mat hermitian_sqrt(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(cplx(0.5) * (h + h.adjoint()));
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

/// Right multiplication by the constant unitary that makes the k = 0
/// coefficient Hermitian positive definite (polar decomposition).
void normalize(MatrixLoop& f) {
  Eigen::JacobiSVD<Mat> svd(f.coeff(0), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat q = svd.matrixV() * svd.matrixU().adjoint();
  for (int k = 0; k <= f.k_trunc(); ++k) f.coeff(k) = f.coeff(k) * q;
}

MatrixLoop holomorphic_part(const std::map<int, Mat>& modes, int n, int k_trunc) {
  MatrixLoop f(n, k_trunc);
  for (int k = 0; k <= k_trunc; ++k) {
    auto it = modes.find(k);
    if (it != modes.end()) f.coeff(k) = it->second;
  }
  return f;
}

double negative_energy(const std::vector<Mat>& samples) {
  double e = 0.0;
  for (const auto& [k, m] : dft_modes(samples))
    if (k < 0) e += m.squaredNorm();
  return e;
}

nlohmann::json loop_json(const MatrixLoop& l) {
  nlohmann::json arr = nlohmann::json::array();
  for (int k = -l.k_trunc(); k <= l.k_trunc(); ++k) {
    const Mat& c = l.coeff(k);
    if (c.squaredNorm() == 0.0) continue;
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < c.cols(); ++j) row.push_back({c(i, j).real(), c(i, j).imag()});
      rows.push_back(row);
    }
    arr.push_back({{"k", k}, {"coeff", rows}});
  }
  return arr;
}

}  // namespace

SpectralFactorization spectral_factor_samples(const std::vector<Mat>& s, const SpectralOptions& opt) {
  const int n_grid = static_cast<int>(s.size());
  const int k = opt.k_trunc;
  if (n_grid == 0 || 2 * k >= n_grid)
    throw std::invalid_argument("spectral_factor: grid too coarse for the truncation order");
  const int n = static_cast<int>(s.front().rows());
  for (int j = 0; j < n_grid; ++j) {
    Eigen::SelfAdjointEigenSolver<Mat> es(cplx(0.5) * (s[j] + s[j].adjoint()), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (!(lo > 1e-8))
      throw NotPositiveDefinite("spectral_factor: min eigenvalue " + std::to_string(lo) +
                                " at theta = " + std::to_string(kTwoPi * j / n_grid));
  }

  MatrixLoop psi(n, k);
  if (opt.initial) {
    for (int m = 0; m <= std::min(k, opt.initial->k_trunc()); ++m) psi.coeff(m) = opt.initial->coeff(m);
  } else {
    Mat mean = Mat::Zero(n, n);
    for (const auto& v : s) mean += v;
    psi.coeff(0) = hermitian_sqrt(mean / cplx(n_grid));
  }
  normalize(psi);

  SpectralFactorization out;
  const Mat id = identity(n);
  std::vector<Mat> g(n_grid);
  for (int it = 1; it <= opt.max_iter; ++it) {
    const std::vector<Mat> p = psi.sample(n_grid);
    for (int j = 0; j < n_grid; ++j) {
      const auto lu = p[j].partialPivLu();
      // Psi^{-1} S Psi^{-*} = Psi^{-1} (Psi^{-1} S^*)^*
      const Mat a = lu.solve(s[j]);
      g[j] = lu.solve(a.adjoint()).adjoint() + id;
    }
    std::map<int, Mat> gm = dft_modes(g);
    std::map<int, Mat> plus;
    plus.emplace(0, cplx(0.5) * gm.at(0));
    for (int m = 1; m <= k; ++m) plus.emplace(m, gm.at(m));
    const std::vector<Mat> ps = modes_to_samples(plus, n_grid, n, n);
    std::vector<Mat> next(n_grid);
    for (int j = 0; j < n_grid; ++j) next[j] = p[j] * ps[j];
    MatrixLoop upd = holomorphic_part(dft_modes(next), n, k);
    normalize(upd);
    double diff = 0.0;
    for (int m = 0; m <= k; ++m) diff += (upd.coeff(m) - psi.coeff(m)).squaredNorm();
    psi = std::move(upd);
    out.iterations = it;
    out.last_update = std::sqrt(diff);
    if (out.last_update < opt.tol) {
      out.factor = std::move(psi);
      return out;
    }
  }
  throw NoConvergence("spectral_factor: update " + std::to_string(out.last_update) + " after " +
                      std::to_string(opt.max_iter) + " iterations");
}

MatrixLoop spectral_factor(const MatrixLoop& s, const SpectralOptions& opt) {
  return spectral_factor_samples(s.sample(opt.n_theta), opt).factor;
}

IwasawaFactors iwasawa_factorize(const MatrixLoop& r, const SpectralOptions& opt) {
  const int n_grid = opt.n_theta;
  const std::vector<Mat> rs = r.sample(n_grid);
  std::vector<Mat> s(n_grid);
  for (int j = 0; j < n_grid; ++j) s[j] = rs[j] * rs[j].adjoint();
  const SpectralFactorization sf = spectral_factor_samples(s, opt);

  IwasawaFactors out;
  out.F = sf.factor;
  const std::vector<Mat> fs = out.F.sample(n_grid);
  std::vector<Mat> us(n_grid), finv(n_grid);
  for (int j = 0; j < n_grid; ++j) {
    finv[j] = fs[j].partialPivLu().inverse();
    us[j] = finv[j] * rs[j];
  }
  out.U = MatrixLoop::from_samples(us, n_grid / 2 - 1);

  auto& d = out.diagnostics;
  d.iterations = sf.iterations;
  d.holomorphy = negative_energy(fs);
  d.inverse_holomorphy = negative_energy(finv);
  const std::vector<Mat> u_eval = out.U.sample(n_grid);
  const Mat id = identity(r.n());
  for (int j = 0; j < n_grid; ++j) {
    d.unitarity = std::max(d.unitarity, (u_eval[j] * u_eval[j].adjoint() - id).norm());
    d.reconstruction = std::max(d.reconstruction, (fs[j] * u_eval[j] - rs[j]).norm());
  }
  d.det_winding = det_winding(out.F, n_grid);
  return out;
}

std::vector<MatrixLoop> integrating_factor_loops(const ExtendedScenario& ext,
                                                 const AttenuationPair& pair,
                                                 const std::vector<PlanePoint>& base, int n_theta,
                                                 int k_trunc, const FlowOptions& flow) {
  std::vector<MatrixLoop> out;
  out.reserve(base.size());
  for (const auto& p : base) {
    std::vector<Mat> samples(n_theta);
    detail::for_each_parallel(n_theta, [&](long j) {
      samples[j] = integrating_factor(ext, pair, {p.x, p.y, kTwoPi * j / n_theta}, flow);
    });
    out.push_back(MatrixLoop::from_samples(samples, k_trunc));
  }
  return out;
}

namespace {

std::vector<Mat> derived_samples(const ExtendedScenario& ext, const AttenuationPair& pair,
                                 const PlanePoint& p, double h, const DerivedAttenuationOptions& opt,
                                 const MatrixLoop& u_center) {
  const int n_grid = opt.n_theta;
  SpectralOptions sp = opt.spectral;
  sp.n_theta = n_grid;
  sp.k_trunc = opt.k_trunc;
  const std::vector<PlanePoint> nbrs{{p.x + h, p.y}, {p.x - h, p.y}, {p.x, p.y + h}, {p.x, p.y - h}};
  const auto loops = integrating_factor_loops(ext, pair, nbrs, n_grid, opt.k_trunc, opt.flow);
  std::vector<std::vector<Mat>> u(4);
  for (int i = 0; i < 4; ++i) u[i] = iwasawa_factorize(loops[i], sp).U.sample(n_grid);

  MatrixLoop u_theta = u_center;
  for (int k = -u_center.k_trunc(); k <= u_center.k_trunc(); ++k)
    u_theta.coeff(k) = cplx(0.0, k) * u_center.coeff(k);
  const std::vector<Mat> uc = u_center.sample(n_grid);
  const std::vector<Mat> ut = u_theta.sample(n_grid);

  const PhiJet ph = ext.inner.surface.phi_first_jet(p.x, p.y);
  const double e = std::exp(-ph.value);
  std::vector<Mat> b(n_grid);
  for (int j = 0; j < n_grid; ++j) {
    const double th = kTwoPi * j / n_grid;
    const double c = std::cos(th), s = std::sin(th);
    const Mat ux = (u[0][j] - u[1][j]) / cplx(2 * h);
    const Mat uy = (u[2][j] - u[3][j]) / cplx(2 * h);
    const double theta_rate = e * (-ph.dx * s + ph.dy * c) + ext.inner.lambda.value(p.x, p.y, th);
    const Mat flow_deriv = cplx(e * c) * ux + cplx(e * s) * uy + cplx(theta_rate) * ut[j];
    b[j] = -(flow_deriv * uc[j].partialPivLu().inverse());
  }
  return b;
}

}  // namespace

DerivedAttenuation derived_attenuation_B(const ExtendedScenario& ext, const AttenuationPair& pair,
                                         const PlanePoint& p, const DerivedAttenuationOptions& opt) {
  SpectralOptions sp = opt.spectral;
  sp.n_theta = opt.n_theta;
  sp.k_trunc = opt.k_trunc;
  DerivedAttenuation out;
  const auto center_loop = integrating_factor_loops(ext, pair, {p}, opt.n_theta, opt.k_trunc, opt.flow);
  out.center = iwasawa_factorize(center_loop.front(), sp);

  const std::vector<Mat> b1 = derived_samples(ext, pair, p, opt.h_fd, opt, out.center.U);
  const std::vector<Mat> b2 = derived_samples(ext, pair, p, 0.5 * opt.h_fd, opt, out.center.U);
  double diff = 0.0, scale = 0.0;
  for (std::size_t j = 0; j < b1.size(); ++j) {
    diff = std::max(diff, (b1[j] - b2[j]).norm());
    scale = std::max(scale, b2[j].norm());
  }
  out.relative_change = scale > 0.0 ? diff / scale : diff;
  if (scale > 1e-12 && out.relative_change > 0.1)
    throw StepTooLarge("derived_attenuation_B: halving h_fd changed B by " +
                       std::to_string(100.0 * out.relative_change) + "%");

  out.modes = dft_modes(b1);
  FiberFunction::Modes fm;
  for (const auto& [k, m] : out.modes) fm.emplace(k, MatrixField::constant(m));
  out.b = FiberFunction(std::move(fm));
  return out;
}

nlohmann::json factors_json(const IwasawaFactors& f) {
  const auto& d = f.diagnostics;
  return {{"F", loop_json(f.F)},
          {"U", loop_json(f.U)},
          {"diagnostics",
           {{"holomorphy", d.holomorphy},
            {"inverse_holomorphy", d.inverse_holomorphy},
            {"unitarity", d.unitarity},
            {"reconstruction", d.reconstruction},
            {"det_winding", d.det_winding},
            {"iterations", d.iterations}}}};
}

}  // namespace twistray
