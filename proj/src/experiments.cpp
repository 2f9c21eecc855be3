#include "twistray/experiments.hpp"

#include <algorithm>
#include <ostream>
#include <regex>

#include "twistray/errors.hpp"
#include "parallel.hpp"
#include "twistray/fiber_fourier.hpp"
#include "twistray/loopfact.hpp"

namespace twistray {

using nlohmann::json;

FanSpec parse_fan(const std::string& text) {
  static const std::regex re(R"((\d+)x(\d+))");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw SchemaError("--fan: expected <n_beta>x<n_alpha>, got '" + text + "'");
  FanSpec f{std::stoi(m[1]), std::stoi(m[2])};
  if (f.n_beta < 1 || f.n_alpha < 1) throw SchemaError("--fan: counts must be positive");
  return f;
}

void export_scatter(const Scenario& s, const std::string& pair, const FanSpec& fan, std::ostream& os) {
  const auto rays = boundary_fan(s.disk.surface, fan.n_beta, fan.n_alpha, s.numerics.eps_glance);
  write_fan_csv(os, scattering_data(s.disk, s.pair(pair), rays, s.flow()), 'C');
}

void export_transform(const Scenario& s, const std::string& pair, const std::string& source,
                      const FanSpec& fan, std::ostream& os) {
  const AttenuationPair& a = s.pair(pair);
  const SourceTerm& f = s.source(source);
  if (a.n() != f.n()) throw SchemaError("source '" + source + "' does not match the dimension of pair '" + pair + "'");
  const auto rays = boundary_fan(s.disk.surface, fan.n_beta, fan.n_alpha, s.numerics.eps_glance);
  write_fan_csv(os, transform_data(s.disk, a, f, rays, s.flow()), 'I');
}

void export_trace(const Scenario& s, const PhaseState& s0, std::ostream& os) {
  const FlowOptions opt = s.flow();
  write_trace_csv(os, integrate_flow(s.disk, normalized(s0), opt.cap(s.disk), opt.step(s.disk)));
}

json export_factorize(const Scenario& s, const std::string& pair, const PlanePoint& p) {
  const auto loops = integrating_factor_loops(s.ext, s.pair(pair), {p}, s.numerics.n_theta, s.numerics.k_trunc, s.flow());
  SpectralOptions opt;
  opt.n_theta = s.numerics.n_theta;
  opt.k_trunc = s.numerics.k_trunc;
  json out = factors_json(iwasawa_factorize(loops.front(), opt));
  out["pair"] = pair;
  out["point"] = {p.x, p.y};
  out["n_theta"] = s.numerics.n_theta;
  out["anchor"] = "R=FU, where F is fiberwise holomorphic with a fiberwise holomorphic inverse and U is unitary";
  return out;
}

json export_modes(const Scenario& s, const std::string& pair, const std::string& source, const PlanePoint& p) {
  const AttenuationPair& a = s.pair(pair);
  const SourceTerm& f = s.source(source);
  if (a.n() != f.n()) throw SchemaError("source '" + source + "' does not match the dimension of pair '" + pair + "'");
  const int n_theta = s.numerics.n_theta_modes;
  std::vector<Mat> samples(n_theta);
  detail::for_each_parallel(n_theta, [&](long j) {
    samples[j] = transport_via_integrating_factor(s.ext, a, f, {p.x, p.y, kTwoPi * j / n_theta}, s.flow());
  });
  const ModeDecomposition d = decompose(samples);
  double largest = 0.0;
  for (const auto& [k, c] : d.modes) largest = std::max(largest, c.norm());
  json coeffs = json::object();
  for (const auto& [k, c] : d.modes) {
    if (c.norm() <= 1e-12 * std::max(1.0, largest)) continue;
    json entries = json::array();
    for (Eigen::Index i = 0; i < c.rows(); ++i) entries.push_back({c(i, 0).real(), c(i, 0).imag()});
    coeffs[std::to_string(k)] = entries;
  }
  json out = mode_energy_json(d.modes);
  out["coefficients"] = coeffs;
  out["pair"] = pair;
  out["source"] = source;
  out["point"] = {p.x, p.y};
  out["n_theta"] = n_theta;
  out["parseval_defect"] = d.parseval_defect;
  out["anchor"] = "-iVu = ku";
  return out;
}

}  // namespace twistray
