#include "twistray/verify.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "twistray/errors.hpp"
#include "twistray/fiber_fourier.hpp"
#include "twistray/loopfact.hpp"

namespace twistray {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::uint64_t suite_seed(std::uint64_t seed, const std::string& suite) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : suite) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return seed ^ h;
}

class Suite {
 public:
  Suite(const Scenario& s, std::string name, std::vector<CheckResult>& out)
      : s_(s), name_(std::move(name)), out_(out), rng_(suite_seed(s.seed, name_)) {}

  const Scenario& scenario() const { return s_; }
  std::mt19937_64& rng() { return rng_; }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::uint64_t next_seed() { return rng_(); }

  /// Runs body, which fills value/detail; errors become failures.
  void check(const std::string& name, const std::string& anchor, double tolerance,
             const std::function<void(CheckResult&)>& body, bool lower_bound = false) {
    CheckResult r;
    r.suite = name_;
    r.name = name;
    r.anchor = anchor;
    r.tolerance = tolerance;
    r.lower_bound = lower_bound;
    const auto t0 = Clock::now();
    try {
      body(r);
    } catch (const Error& e) {
      r.skipped = false;
      r.value = lower_bound ? 0.0 : std::numeric_limits<double>::infinity();
      r.note = e.what();
    }
    r.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
    out_.push_back(std::move(r));
  }

  void skip(const std::string& name, const std::string& anchor, const std::string& why) {
    CheckResult r;
    r.suite = name_;
    r.name = name;
    r.anchor = anchor;
    r.skipped = true;
    r.note = why;
    out_.push_back(std::move(r));
  }

 private:
  const Scenario& s_;
  std::string name_;
  std::vector<CheckResult>& out_;
  std::mt19937_64 rng_;
};

std::vector<PhaseState> fan_states(const Scenario& s) {
  std::vector<PhaseState> out;
  for (const auto& r : boundary_fan(s.disk.surface, s.numerics.fan_beta, s.numerics.fan_alpha, s.numerics.eps_glance))
    out.push_back(r.state);
  return out;
}

PolyField<cplx> random_poly(Suite& su, int rows, int cols, int degree, double scale) {
  PolyField<cplx> p(rows, cols);
  for (int i = 0; i <= degree; ++i)
    for (int j = 0; i + j <= degree; ++j) {
      Mat m(rows, cols);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = cplx(su.uniform(-scale, scale), su.uniform(-scale, scale));
      p.add_term(i, j, m);
    }
  return p;
}

json state_json(const PhaseState& s) { return json::array({s.x, s.y, s.theta}); }

double rel_diff(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

void structure_suite(Suite& su) {
  const Scenario& s = su.scenario();
  su.check("structure_equations", "[X,V] = X_⊥, [X_⊥,V] = -X, [X,X_⊥] = -KV", s.numerics.tol("structure", 1e-10),
           [&](CheckResult& r) {
             const auto samples = random_interior_states(s.disk.surface, 100, su.next_seed(), 0.95);
             double worst = 0.0;
             for (const auto& g : {angular::exp_mode(-1), angular::exp_mode(0), angular::exp_mode(2)}) {
               const auto u = separable_test_function(random_poly(su, 1, 1, 3, 1.0), g);
               worst = std::max(worst, check_structure_equations(s.disk.surface, u, samples).max());
             }
             r.value = worst;
             r.detail = {{"samples", 100}, {"test_functions", 3}};
           });
}

void flow_suite(Suite& su) {
  const Scenario& s = su.scenario();
  const FlowOptions opt = s.flow();
  su.check("nontrapping_certificate", "(X+λ V) f>0 with f = -τ̃: = 2 > 0", s.numerics.tol("certificate", 1e-4),
           [&](CheckResult& r) {
             const auto states = random_interior_states(s.disk.surface, 50, su.next_seed(), 0.8);
             const auto rep = nontrapping_certificate(s.disk, states, 1e-3, opt);
             r.value = rep.max_deviation;
             r.detail = {{"states", 50}, {"worst", state_json(rep.worst)}};
           });
  su.check("flow_group_property", "φ_t ∘ φ_r = φ_{t+r}", s.numerics.tol("flow_group", 1e-8), [&](CheckResult& r) {
    const auto states = random_interior_states(s.disk.surface, 20, su.next_seed(), 0.5);
    for (const auto& st : states) {
      const double tau = forward_exit(s.disk, st, opt).first;
      const double t = su.uniform(0.05, 0.45) * tau, q = su.uniform(0.05, 0.45) * tau;
      const PhaseState a = flow_state(s.disk, st, t + q, opt);
      const PhaseState b = flow_state(s.disk, flow_state(s.disk, st, q, opt), t, opt);
      r.value = std::max({r.value, std::hypot(a.x - b.x, a.y - b.y), std::abs(std::remainder(a.theta - b.theta, kTwoPi))});
    }
    r.detail = {{"states", 20}};
  });
  su.check("scattering_involution", "α(x, v) := φ_{τ̃}(x, v), α ∘ α = Id", s.numerics.tol("scattering", 1e-6),
           [&](CheckResult& r) {
             for (const auto& ray : random_boundary_fan(s.disk.surface, 20, su.next_seed(), 0.05)) {
               const PhaseState back = scattering_relation(s.disk, scattering_relation(s.disk, ray.state, opt), opt);
               r.value = std::max({r.value, std::hypot(back.x - ray.state.x, back.y - ray.state.y),
                                   std::abs(std::remainder(back.theta - ray.state.theta, kTwoPi))});
             }
             r.detail = {{"rays", 20}};
           });
}

void cocycle_suite(Suite& su) {
  const Scenario& s = su.scenario();
  const FlowOptions opt = s.flow();
  if (s.pairs.empty()) su.skip("cocycle_law", "C(x,v,t+s)=C(φ_t(x,v),s)C(x,v,t)", "no attenuation pairs");
  for (const auto& [name, pair] : s.pairs)
    su.check("cocycle_law/" + name, "C(x,v,t+s)=C(φ_t(x,v),s)C(x,v,t)", s.numerics.tol("cocycle", 1e-8),
             [&](CheckResult& r) {
               const auto states = random_interior_states(s.disk.surface, 50, su.next_seed(), 0.8);
               for (const auto& st : states) {
                 const double tau = forward_exit(s.disk, st, opt).first;
                 const double t = su.uniform(0.0, 0.5) * tau, q = su.uniform(0.0, 0.5) * tau;
                 const Mat lhs = cocycle(s.disk, pair, st, t + q, opt);
                 const Mat rhs = cocycle(s.disk, pair, flow_state(s.disk, st, t, opt), q, opt) *
                                 cocycle(s.disk, pair, st, t, opt);
                 r.value = std::max(r.value, rel_diff(rhs, lhs));
               }
               r.detail = {{"triples", 50}, {"n", pair.n()}};
             });
}

void integrating_factor_suite(Suite& su) {
  const Scenario& s = su.scenario();
  const FlowOptions opt = s.flow();
  if (s.pairs.empty()) su.skip("integrating_factor", "(X+λ V)R+𝒜R=0", "no attenuation pairs");
  for (const auto& [name, pair] : s.pairs) {
    su.check("equivariance/" + name, "(X+λ V)R+𝒜R=0, i.e. R(φ_t s) = C(s,t) R(s)",
             s.numerics.tol("integrating_factor", 1e-8), [&](CheckResult& r) {
               const auto states = random_interior_states(s.disk.surface, 20, su.next_seed(), 0.8);
               for (const auto& st : states) {
                 const double t = su.uniform(0.0, 0.5) * forward_exit(s.disk, st, opt).first;
                 const Mat lhs = integrating_factor(s.ext, pair, flow_state(s.disk, st, t, opt), opt);
                 const Mat rhs = cocycle(s.disk, pair, st, t, opt) * integrating_factor(s.ext, pair, st, opt);
                 r.value = std::max(r.value, rel_diff(lhs, rhs));
               }
               r.detail = {{"states", 20}};
             });
    for (const auto& [sname, src] : s.sources) {
      if (src.n() != pair.n()) continue;
      su.check("integral_representation/" + name + "/" + sname, "R(x, v) ∫_0^{τ(x, v)} R^{-1} f",
               s.numerics.tol("integral_representation", 1e-6), [&](CheckResult& r) {
                 const auto fan = random_boundary_fan(s.disk.surface, 8, su.next_seed(), 0.05);
                 for (const auto& ray : fan) {
                   const Mat direct = attenuated_transform(s.disk, pair, src, ray.state, opt);
                   const Mat quad = transport_via_integrating_factor(s.ext, pair, src, ray.state, opt);
                   r.value = std::max(r.value, (quad - direct).norm() / std::max(1.0, direct.norm()));
                 }
                 r.detail = {{"rays", 8}};
               });
    }
  }
}

void pseudolinearization_suite(Suite& su) {
  const Scenario& s = su.scenario();
  const FlowOptions opt = s.flow();
  const std::string anchor = "C_𝒜 [C_ℬ]^{-1} = Id+I_{E(𝒜,ℬ)}^{λ}(𝒜-ℬ)";
  std::vector<std::pair<std::string, std::string>> combos;
  for (auto a = s.pairs.begin(); a != s.pairs.end(); ++a) {
    bool partnered = false;
    for (auto b = std::next(a); b != s.pairs.end(); ++b)
      if (a->second.n() == b->second.n()) {
        combos.emplace_back(a->first, b->first);
        partnered = true;
      }
    if (!partnered) combos.emplace_back(a->first, "");
  }
  if (combos.empty()) su.skip("pseudolinearization", anchor, "no attenuation pairs");
  const auto fan = fan_states(s);
  for (const auto& [a, b] : combos) {
    const AttenuationPair& pa = s.pairs.at(a);
    const AttenuationPair pb = b.empty() ? AttenuationPair(pa.n()) : s.pairs.at(b);
    su.check("pseudolinearization/" + a + "/" + (b.empty() ? "zero" : b), anchor,
             s.numerics.tol("pseudolinearization", 1e-5), [&](CheckResult& r) {
               const auto res = pseudolinearization_residual(s.disk, pa, pb, fan, opt);
               r.value = res.max_residual;
               r.detail = {{"rays", fan.size()}, {"worst", state_json(res.worst)}};
             });
  }
}

void gauge_suite(Suite& su) {
  const Scenario& s = su.scenario();
  const FlowOptions opt = s.flow();
  const std::string anchor = "C_{(A,Φ)·u} = C_{A,Φ}";
  bool any = false;
  const auto fan = fan_states(s);
  for (const auto& [gname, gauge] : s.gauges)
    for (const auto& [pname, pair] : s.pairs) {
      if (pair.n() != gauge.u.rows()) continue;
      any = true;
      const std::string id = gname + "/" + pname;
      if (!gauge.boundary_flag) {
        su.skip("gauge_invariance/" + id, anchor, "gauge is not the identity on the boundary");
        continue;
      }
      const AttenuationPair moved = gauge_transform(pair, gauge);
      GaugeWitnessReport rep;
      bool done = false;
      auto run = [&] {
        if (!done) {
          const auto interior = random_interior_states(s.disk.surface, 20, su.next_seed(), 0.9);
          rep = gauge_equivalence_witness(s.disk, pair, moved, gauge, interior, fan, opt);
          done = true;
        }
      };
      su.check("gauge_invariance/" + id, anchor, s.numerics.tol("gauge", 1e-6), [&](CheckResult& r) {
        run();
        r.value = rep.scattering;
        r.detail = {{"rays", fan.size()}, {"condition", gauge.max_condition}};
      });
      su.check("gauge_transport/" + id, "U^{-1} (X+λ V) U+U^{-1} 𝒜 U", s.numerics.tol("gauge_algebraic", 1e-9),
               [&](CheckResult& r) {
                 run();
                 r.value = rep.algebraic;
               });
    }
  if (!any) su.skip("gauge_invariance", anchor, "no gauge matches a pair dimension");
}

void kernel_suite(Suite& su) {
  const Scenario& s = su.scenario();
  const FlowOptions opt = s.flow();
  const std::string anchor = "f_0=Φ p and α=dp+A p";
  if (s.kernel_sources.empty()) su.skip("kernel_vanishing", anchor, "no kernel_of sources");
  const auto fan = boundary_fan(s.disk.surface, s.numerics.fan_beta, s.numerics.fan_alpha, s.numerics.eps_glance);
  for (const auto& [name, ks] : s.kernel_sources)
    su.check("kernel_vanishing/" + name, anchor, s.numerics.tol("kernel", 1e-6), [&](CheckResult& r) {
      const FanData d = transform_data(s.disk, s.pair(ks.pair), s.source(name), fan, opt);
      for (const auto& v : d.values) r.value = std::max(r.value, v.norm());
      r.detail = {{"rays", d.values.size()}, {"skipped", d.skipped}, {"pair", ks.pair}};
    });
}

FiberFunction random_fiber(Suite& su, int lo, int hi) {
  FiberFunction::Modes m;
  for (int k = lo; k <= hi; ++k) m.emplace(k, MatrixField(random_poly(su, 2, 1, 2, 0.5)));
  return FiberFunction(std::move(m));
}

void fourier_suite(Suite& su) {
  const Scenario& s = su.scenario();
  const double r0 = s.disk.surface.radius();
  const std::string mapping_anchor = "X + λ V : ⊕_{k≥ 0}Ω_{k}→ ⊕_{k≥ -1}Ω_{k}";
  if (s.disk.lambda.degree() <= 2) {
    su.check("mapping_property", mapping_anchor, s.numerics.tol("mapping", 1e-10), [&](CheckResult& r) {
      std::vector<PlanePoint> grid;
      for (const auto& st : random_interior_states(s.disk.surface, 25, su.next_seed(), 1.0)) grid.push_back({st.x, st.y});
      for (int trial = 0; trial < 5; ++trial) {
        const auto rep = mapping_property_check(s.disk, random_fiber(su, 0, 4), grid);
        r.value = std::max(r.value, rep.leakage);
      }
      r.detail = {{"grid", 25}, {"functions", 5}, {"lambda_degree", s.disk.lambda.degree()}};
    });
  } else {
    su.skip("mapping_property", mapping_anchor, "lambda has degree above 2; see the obstruction suite");
  }
  su.check("generator_vs_flow", "λ_{±m} V : Ω_k → Ω_{k±m}", s.numerics.tol("generator", 1e-5), [&](CheckResult& r) {
    const double dt = 1e-3;
    const FlowOptions opt = s.flow();
    for (const auto& st : random_interior_states(s.disk.surface, 20, su.next_seed(), 0.8)) {
      const FiberFunction w = random_fiber(su, -2, 2);
      const PhaseState f = flow_state(s.disk, st, dt, opt), b = flow_state(s.disk, st, -dt, opt);
      const Mat fd = (w.value(f.x, f.y, f.theta) - w.value(b.x, b.y, b.theta)) / cplx(2 * dt);
      Mat exact = Mat::Zero(2, 1);
      for (const auto& [k, c] : apply_generator(s.disk, w, {st.x, st.y})) exact += std::polar(1.0, k * st.theta) * c;
      r.value = std::max(r.value, (fd - exact).norm());
    }
    r.detail = {{"states", 20}};
  });
  su.check("parseval", "u=Σ_{k=-∞}^∞ u_k", s.numerics.tol("parseval", 1e-10), [&](CheckResult& r) {
    for (int trial = 0; trial < 10; ++trial) {
      const FiberFunction w = random_fiber(su, -4, 4);
      const double x = su.uniform(-0.5, 0.5) * r0, y = su.uniform(-0.5, 0.5) * r0;
      r.value = std::max(r.value, decompose(fiber_samples(w, x, y, 64)).parseval_defect);
    }
  });
}

void obstruction_suite(Suite& su) {
  const Scenario& s = su.scenario();
  const std::string anchor = "Fourier modes of three or higher";
  if (s.disk.lambda.degree() < 3) {
    su.skip("obstruction_witness", anchor, "lambda has degree at most 2");
    return;
  }
  su.check("obstruction_witness", anchor, s.numerics.tol("obstruction", 1e-8),
           [&](CheckResult& r) {
             ObstructionWitness best;
             for (const auto& st : random_interior_states(s.disk.surface, 16, su.next_seed(), 0.9)) {
               const ObstructionWitness w = obstruction_demo(s.disk, {st.x, st.y});
               if (w.magnitude > best.magnitude) best = w;
             }
             r.value = best.magnitude;
             r.detail = {{"point", {best.point.x, best.point.y}},
                         {"mode", -2},
                         {"coefficient", {best.coefficient.real(), best.coefficient.imag()}}};
           },
           true);
}

void loopfact_suite(Suite& su) {
  const Scenario& s = su.scenario();
  if (s.pairs.empty()) su.skip("loop_factorization", "R=FU", "no attenuation pairs");
  DerivedAttenuationOptions dopt;
  dopt.h_fd = s.numerics.h_fd;
  dopt.n_theta = s.numerics.n_theta;
  dopt.k_trunc = s.numerics.k_trunc;
  dopt.flow = s.flow();
  const bool low_degree = s.disk.lambda.degree() <= 2;
  for (const auto& [name, pair] : s.pairs) {
    const auto points = random_interior_states(s.disk.surface, s.numerics.loop_points, su.next_seed(), 0.5);
    std::vector<DerivedAttenuation> derived(points.size());
    std::vector<std::string> errors(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      try {
        derived[i] = derived_attenuation_B(s.ext, pair, {points[i].x, points[i].y}, dopt);
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
    auto each = [&](const std::string& check, const std::string& anchor, double tol,
                    const std::function<double(const DerivedAttenuation&)>& f) {
      su.check(check + "/" + name, anchor, tol, [&](CheckResult& r) {
        for (std::size_t i = 0; i < points.size(); ++i) {
          if (!errors[i].empty()) throw Error(errors[i]);
          r.value = std::max(r.value, f(derived[i]));
        }
        r.detail = {{"base_points", points.size()}};
      });
    };
    each("holomorphy", "fiberwise holomorphic with a fiberwise holomorphic inverse",
         s.numerics.tol("holomorphy", 1e-9), [](const DerivedAttenuation& d) {
           return std::max(d.center.diagnostics.holomorphy, d.center.diagnostics.inverse_holomorphy);
         });
    each("unitarity", "R=FU with U unitary", s.numerics.tol("unitarity", 1e-8),
         [](const DerivedAttenuation& d) { return d.center.diagnostics.unitarity; });
    each("reconstruction", "R=FU", s.numerics.tol("reconstruction", 1e-7),
         [](const DerivedAttenuation& d) { return d.center.diagnostics.reconstruction; });
    each("det_winding", "winding of det F = 0", 0.5,
         [](const DerivedAttenuation& d) { return std::abs(double(d.center.diagnostics.det_winding)); });
    if (!low_degree) {
      su.skip("derived_attenuation/" + name, "ℬ= -((X+λ V)U )U^{−1} is skew-Hermitian",
              "degree bound only predicted for deg lambda <= 2");
      continue;
    }
    each("skew_hermitian_B", "ℬ= -((X+λ V)U )U^{−1} is skew-Hermitian", s.numerics.tol("skew", 5e-4),
         [](const DerivedAttenuation& d) { return skew_hermitian_degree_check(d.modes, 1).skew_defect; });
    each("degree_B", "ℬ∈ ⊕_{-m≤ k≤ m}Ω_k, m = 1", s.numerics.tol("degree", 5e-4),
         [](const DerivedAttenuation& d) { return skew_hermitian_degree_check(d.modes, 1).out_of_band; });
  }
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"structure", "flow",   "cocycle",    "integrating-factor",
                                              "pseudolinearization", "gauge", "kernel", "fourier",
                                              "obstruction",         "loopfact"};
  return names;
}

VerifyReport run_verify(const Scenario& s, const std::vector<std::string>& suites) {
  static const std::map<std::string, std::function<void(Suite&)>> table{
      {"structure", structure_suite},
      {"flow", flow_suite},
      {"cocycle", cocycle_suite},
      {"integrating-factor", integrating_factor_suite},
      {"pseudolinearization", pseudolinearization_suite},
      {"gauge", gauge_suite},
      {"kernel", kernel_suite},
      {"fourier", fourier_suite},
      {"obstruction", obstruction_suite},
      {"loopfact", loopfact_suite}};
  VerifyReport rep;
  for (const auto& name : suites) {
    auto it = table.find(name);
    if (it == table.end()) throw SchemaError("unknown suite '" + name + "'");
    Suite su(s, name, rep.checks);
    it->second(su);
  }
  return rep;
}

bool VerifyReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass()) return false;
  return true;
}

json VerifyReport::to_json(const Scenario& s) const {
  json suites = json::object();
  for (const auto& c : checks) {
    json& su = suites[c.suite];
    if (su.is_null()) su = {{"pass", true}, {"runtime_s", 0.0}, {"checks", json::array()}};
    json entry = {{"name", c.name},
                  {"anchor", c.anchor},
                  {"value", c.value},
                  {"tolerance", c.tolerance},
                  {"comparison", c.lower_bound ? ">" : "<"},
                  {"status", c.skipped ? "skipped" : (c.pass() ? "pass" : "fail")},
                  {"runtime_s", c.runtime_s}};
    if (!c.note.empty()) entry["note"] = c.note;
    if (!c.detail.empty()) entry["detail"] = c.detail;
    su["checks"].push_back(entry);
    su["pass"] = su["pass"].get<bool>() && c.pass();
    su["runtime_s"] = su["runtime_s"].get<double>() + c.runtime_s;
  }
  return {{"config", s.origin},
          {"seed", s.seed},
          {"certification", certification_json(s)},
          {"suites", suites},
          {"pass", pass()}};
}

}  // namespace twistray
