#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "twistray/fiber_fourier.hpp"
#include "twistray/matrix_loop.hpp"
#include "twistray/transport.hpp"

namespace twistray {

struct SpectralOptions {
  int n_theta = 256;
  int k_trunc = 64;
  double tol = 1e-10;
  int max_iter = 200;
  /// Starting iterate; defaults to the constant S_0^{1/2}.
  std::optional<MatrixLoop> initial;
};

struct SpectralFactorization {
  MatrixLoop factor;  // modes 0..K, k = 0 coefficient Hermitian positive definite
  int iterations = 0;
  double last_update = 0.0;
};

/// Wilson's Newton iteration for F with F F^* = S on the grid, F holomorphic
/// and invertible on the closed disk. S is given by its grid samples.
SpectralFactorization spectral_factor_samples(const std::vector<Mat>& s_samples,
                                              const SpectralOptions& opt = {});

MatrixLoop spectral_factor(const MatrixLoop& s, const SpectralOptions& opt = {});

struct IwasawaDiagnostics {
  double holomorphy = 0.0;          // negative-mode energy of F
  double inverse_holomorphy = 0.0;  // negative-mode energy of F^{-1}
  double unitarity = 0.0;           // max |U U^* - Id|_F on the grid
  double reconstruction = 0.0;      // max |F U - R|_F on the grid
  int det_winding = 0;              // winding number of det F
  int iterations = 0;
};

struct IwasawaFactors {
  MatrixLoop F;
  MatrixLoop U;
  IwasawaDiagnostics diagnostics;
};

/// R = F U with F = spectral_factor(R R^*) and U = F^{-1} R.
IwasawaFactors iwasawa_factorize(const MatrixLoop& r, const SpectralOptions& opt = {});

/// R(x, theta_j) on an N-point fiber grid at each base point, assembled into
/// loops truncated at K.
std::vector<MatrixLoop> integrating_factor_loops(const ExtendedScenario& ext,
                                                 const AttenuationPair& pair,
                                                 const std::vector<PlanePoint>& base,
                                                 int n_theta = 256, int k_trunc = 64,
                                                 const FlowOptions& flow = {});

struct DerivedAttenuationOptions {
  double h_fd = 1e-4;
  int n_theta = 256;
  int k_trunc = 64;
  FlowOptions flow;
  SpectralOptions spectral;
};

struct DerivedAttenuation {
  ModeValues modes;            // B_k at the base point
  FiberFunction b;             // same, as a fiber function with constant coefficients
  double relative_change = 0;  // max |B(h) - B(h/2)| / max |B(h/2)|
  IwasawaFactors center;       // factorization at the base point
};

/// B = -((X + lambda V) U) U^{-1} at the base point p, where U is the
/// unitary factor of the integrating-factor loop. The flow derivative is
/// expanded by the chain rule: base-point partials of U by central
/// differences with step h_fd over independently factorized neighbors, the
/// fiber derivative spectrally. StepTooLarge when halving h_fd moves B by
/// more than 10%.
DerivedAttenuation derived_attenuation_B(const ExtendedScenario& ext, const AttenuationPair& pair,
                                         const PlanePoint& p,
                                         const DerivedAttenuationOptions& opt = {});

/// {"F": [...], "U": [...], "diagnostics": {...}} with one entry per mode
/// {"k": k, "coeff": [[[re, im], ...], ...]}.
nlohmann::json factors_json(const IwasawaFactors& f);

}  // namespace twistray
