#include "twistray/scenario.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "twistray/errors.hpp"

namespace twistray {
namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) schema_fail(where, "missing key '" + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_fail(where, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) schema_fail(where, "expected an integer");
  return j.get<int>();
}

/// A number, or [re] / [re, im].
cplx complex_entry(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && (j.size() == 1 || j.size() == 2)) {
    const double re = number(j[0], where + "/0");
    const double im = j.size() == 2 ? number(j[1], where + "/1") : 0.0;
    return {re, im};
  }
  schema_fail(where, "expected a number or [re, im]");
}

int exponent(const json& j, const std::string& where) {
  const int e = integer(j, where);
  if (e < 0) schema_fail(where, "exponents must be nonnegative");
  return e;
}

/// [[i, j, c], ...] with real c.
PolyField<double> real_poly(const json& j, const std::string& where) {
  if (!j.is_array()) schema_fail(where, "expected a list of [i, j, c] terms");
  PolyField<double> p(1, 1);
  for (std::size_t t = 0; t < j.size(); ++t) {
    const std::string w = where + "/" + std::to_string(t);
    if (!j[t].is_array() || j[t].size() != 3) schema_fail(w, "expected [i, j, c]");
    p += PolyField<double>::scalar_monomial(exponent(j[t][0], w + "/0"), exponent(j[t][1], w + "/1"),
                                            number(j[t][2], w + "/2"));
  }
  return p;
}

/// [[i, j, re], ...] or [[i, j, re, im], ...].
PolyField<cplx> complex_poly(const json& j, const std::string& where) {
  if (!j.is_array()) schema_fail(where, "expected a list of [i, j, re(, im)] terms");
  PolyField<cplx> p(1, 1);
  for (std::size_t t = 0; t < j.size(); ++t) {
    const std::string w = where + "/" + std::to_string(t);
    if (!j[t].is_array() || (j[t].size() != 3 && j[t].size() != 4))
      schema_fail(w, "expected [i, j, re] or [i, j, re, im]");
    const double im = j[t].size() == 4 ? number(j[t][3], w + "/3") : 0.0;
    p += PolyField<cplx>::scalar_monomial(exponent(j[t][0], w + "/0"), exponent(j[t][1], w + "/1"),
                                          {number(j[t][2], w + "/2"), im});
  }
  return p;
}

Mat matrix_entry_table(const json& j, int rows, int cols, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows)
    schema_fail(where, "expected " + std::to_string(rows) + " rows");
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const std::string wr = where + "/" + std::to_string(r);
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
      schema_fail(wr, "expected " + std::to_string(cols) + " entries");
    for (int c = 0; c < cols; ++c) m(r, c) = complex_entry(j[r][c], wr + "/" + std::to_string(c));
  }
  return m;
}

/// {"terms": [{"x": i, "y": j, "coeff": [[entry, ...], ...]}, ...]} with the
/// shape fixed by the caller.
PolyField<cplx> matrix_poly(const json& j, int rows, int cols, const std::string& where) {
  PolyField<cplx> p(rows, cols);
  if (j.is_null()) return p;
  const json& terms = j.is_array() ? j : require(j, "terms", where);
  const std::string wt = j.is_array() ? where : where + "/terms";
  if (!terms.is_array()) schema_fail(wt, "expected a list of terms");
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string w = wt + "/" + std::to_string(t);
    const int px = exponent(require(terms[t], "x", w), w + "/x");
    const int py = exponent(require(terms[t], "y", w), w + "/y");
    p.add_term(px, py, matrix_entry_table(require(terms[t], "coeff", w), rows, cols, w + "/coeff"));
  }
  return p;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

PolyField<cplx> random_matrix_poly(std::mt19937_64& rng, int n, int degree, double scale, bool skew) {
  std::uniform_real_distribution<double> u(-scale, scale);
  PolyField<cplx> p(n, n);
  for (int i = 0; i <= degree; ++i)
    for (int k = 0; i + k <= degree; ++k) {
      Mat m(n, n);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) m(r, c) = cplx(u(rng), u(rng));
      if (skew) m = cplx(0.5) * (m - m.adjoint());
      p.add_term(i, k, m);
    }
  return p;
}

LambdaField parse_lambda(const json& j, const std::string& where) {
  if (j.is_null()) return LambdaField();
  const std::string kind = require(j, "kind", where).get<std::string>();
  if (kind == "zero") return LambdaField();
  if (kind == "constant") return LambdaField::constant(number(require(j, "value", where), where + "/value"));
  if (kind == "magnetic") return LambdaField::magnetic(real_poly(require(j, "b", where), where + "/b"));
  if (kind == "thermostat")
    return LambdaField::thermostat(complex_poly(require(j, "a", where), where + "/a"));
  if (kind == "modes") {
    const json& m = require(j, "modes", where);
    if (!m.is_object()) schema_fail(where + "/modes", "expected an object keyed by mode");
    LambdaField::Modes modes;
    for (const auto& [key, val] : m.items()) {
      int k = 0;
      try {
        std::size_t used = 0;
        k = std::stoi(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        schema_fail(where + "/modes", "mode key '" + key + "' is not an integer");
      }
      modes.emplace(k, complex_poly(val, where + "/modes/" + key));
    }
    return LambdaField::from_modes(std::move(modes));
  }
  schema_fail(where + "/kind", "unknown lambda kind '" + kind + "'");
}

AttenuationPair parse_pair(const json& j, const std::string& name, std::uint64_t seed,
                           const std::string& where) {
  if (j.contains("random")) {
    const json& r = j.at("random");
    const std::string w = where + "/random";
    const int n = integer(require(r, "n", w), w + "/n");
    if (n < 1 || n > kMaxDim) schema_fail(w + "/n", "n must lie in [1, " + std::to_string(kMaxDim) + "]");
    const int degree = r.contains("degree") ? exponent(r["degree"], w + "/degree") : 1;
    const double scale = r.contains("scale") ? number(r["scale"], w + "/scale") : 0.5;
    const bool skew = r.value("skew", false);
    std::mt19937_64 rng(seed ^ fnv1a(name));
    AttenuationPair p(random_matrix_poly(rng, n, degree, scale, skew),
                      random_matrix_poly(rng, n, degree, scale, skew),
                      random_matrix_poly(rng, n, degree, scale, skew));
    p.unitary_connection = p.skew_higgs = skew;
    return p;
  }
  const int n = integer(require(j, "n", where), where + "/n");
  if (n < 1 || n > kMaxDim) schema_fail(where + "/n", "n must lie in [1, " + std::to_string(kMaxDim) + "]");
  AttenuationPair p(matrix_poly(j.value("ax", json()), n, n, where + "/ax"),
                    matrix_poly(j.value("ay", json()), n, n, where + "/ay"),
                    matrix_poly(j.value("higgs", json()), n, n, where + "/higgs"));
  p.unitary_connection = j.value("unitary_connection", false);
  p.skew_higgs = j.value("skew_higgs", false);
  return p;
}

void parse_numerics(const json& j, Numerics& n) {
  if (j.is_null()) return;
  const std::string w = "/numerics";
  if (!j.is_object()) schema_fail(w, "expected an object");
  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = number(j[key], w + "/" + key);
  };
  auto whole = [&](const char* key, int& out, int lo) {
    if (!j.contains(key)) return;
    out = integer(j[key], w + "/" + key);
    if (out < lo) schema_fail(w + "/" + key, "must be at least " + std::to_string(lo));
  };
  num("h", n.h);
  num("time_cap", n.time_cap);
  num("eps_glance", n.eps_glance);
  num("delta", n.delta);
  num("h_fd", n.h_fd);
  whole("n_theta", n.n_theta, 4);
  whole("k_trunc", n.k_trunc, 0);
  whole("n_theta_modes", n.n_theta_modes, 4);
  whole("fan_beta", n.fan_beta, 1);
  whole("fan_alpha", n.fan_alpha, 1);
  whole("probes", n.probes, 1);
  whole("loop_points", n.loop_points, 1);
  if (2 * n.k_trunc >= n.n_theta) schema_fail(w + "/k_trunc", "needs 2 k_trunc < n_theta");
  if (!(n.delta > 0.0 && n.delta <= 1.0)) schema_fail(w + "/delta", "must lie in (0, 1]");
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) schema_fail(w + "/tolerances", "expected an object");
    for (const auto& [key, val] : t.items()) n.tolerances[key] = number(val, w + "/tolerances/" + key);
  }
}

std::string describe(const PhaseState& s) {
  std::ostringstream os;
  os.precision(17);
  os << "(x=" << s.x << ", y=" << s.y << ", theta=" << s.theta << ")";
  return os.str();
}

void certify(Scenario& s) {
  s.convexity = strict_lambda_convexity_report(s.disk.surface, s.disk.lambda, 256);
  if (!s.convexity.convex())
    throw CertificationFailed("boundary not strictly lambda-convex: margin " +
                              std::to_string(s.convexity.min_margin) + " at " +
                              describe(s.convexity.witness));
  const FlowOptions opt = s.flow();
  for (const auto& ray : random_boundary_fan(s.disk.surface, s.numerics.probes, s.seed, s.numerics.eps_glance)) {
    try {
      forward_exit(s.disk, ray.state, opt);
    } catch (const CapReached&) {
      throw CertificationFailed("probe ray did not exit before the time cap: " + describe(ray.state));
    }
  }
  try {
    s.ext = extend_scenario(s.disk, s.numerics.delta, s.numerics.time_cap, s.numerics.probes, opt);
  } catch (const ExtensionNotConvex& e) {
    throw CertificationFailed(std::string("extension: ") + e.what());
  } catch (const ExtensionTrapped& e) {
    throw CertificationFailed(std::string("extension: ") + e.what());
  }
}

}  // namespace

const AttenuationPair& Scenario::pair(const std::string& name) const {
  auto it = pairs.find(name);
  if (it == pairs.end()) throw SchemaError("/pairs: no pair named '" + name + "'");
  return it->second;
}

const SourceTerm& Scenario::source(const std::string& name) const {
  auto it = sources.find(name);
  if (it == sources.end()) throw SchemaError("/sources: no source named '" + name + "'");
  return it->second;
}

Scenario scenario_from_json(const json& j, const std::string& origin) {
  if (!j.is_object()) schema_fail("", "config must be a JSON object");
  Scenario s;
  s.origin = origin;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) schema_fail("/seed", "expected a nonnegative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  parse_numerics(j.value("numerics", json()), s.numerics);

  const json& surf = require(j, "surface", "");
  const double radius = surf.contains("radius") ? number(surf["radius"], "/surface/radius") : 1.0;
  if (!(radius > 0.0)) schema_fail("/surface/radius", "must be positive");
  const PolyField<double> phi = surf.contains("phi") ? real_poly(surf["phi"], "/surface/phi") : PolyField<double>(1, 1);
  s.disk.surface = ConformalSurface(phi, radius);
  s.disk.lambda = parse_lambda(j.value("lambda", json()), "/lambda");
  std::vector<PlanePoint> probe_points;
  for (int i = 0; i < 16; ++i)
    probe_points.push_back({0.7 * radius * std::cos(kTwoPi * i / 16), 0.3 * radius * std::sin(kTwoPi * i / 16)});
  if (s.disk.lambda.reality_defect(probe_points) > 1e-12)
    schema_fail("/lambda", "lambda must be real: mode -k has to be the conjugate of mode k");

  if (j.contains("pairs")) {
    const json& pairs = j["pairs"];
    if (!pairs.is_object()) schema_fail("/pairs", "expected an object keyed by name");
    for (const auto& [name, val] : pairs.items()) {
      try {
        s.pairs.emplace(name, parse_pair(val, name, s.seed, "/pairs/" + name));
      } catch (const DimensionMismatch& e) {
        schema_fail("/pairs/" + name, e.what());
      }
    }
  }

  if (j.contains("sources")) {
    const json& sources = j["sources"];
    if (!sources.is_object()) schema_fail("/sources", "expected an object keyed by name");
    for (const auto& [name, val] : sources.items()) {
      const std::string w = "/sources/" + name;
      if (val.contains("kernel_of")) {
        const json& k = val["kernel_of"];
        const std::string pair_name = require(k, "pair", w + "/kernel_of").get<std::string>();
        if (!s.pairs.count(pair_name)) schema_fail(w + "/kernel_of/pair", "unknown pair '" + pair_name + "'");
        const AttenuationPair& pair = s.pairs.at(pair_name);
        const int n = pair.n();
        PolyField<cplx> p(n, 1);
        if (k.contains("q")) {
          p = defining_function<cplx>(radius) * matrix_poly(k["q"], n, 1, w + "/kernel_of/q");
        } else {
          p = matrix_poly(require(k, "p", w + "/kernel_of"), n, 1, w + "/kernel_of/p");
        }
        try {
          s.sources.emplace(name, kernel_element(pair, p, s.disk.surface));
        } catch (const BoundaryNonzero& e) {
          schema_fail(w + "/kernel_of", e.what());
        }
        s.kernel_sources.emplace(name, KernelSource{pair_name, p});
      } else {
        const json& e = val.contains("explicit") ? val["explicit"] : val;
        const int n = integer(require(e, "n", w), w + "/n");
        if (n < 1 || n > kMaxDim) schema_fail(w + "/n", "n out of range");
        s.sources.emplace(name, SourceTerm(matrix_poly(e.value("f0", json()), n, 1, w + "/f0"),
                                           matrix_poly(e.value("ax", json()), n, 1, w + "/ax"),
                                           matrix_poly(e.value("ay", json()), n, 1, w + "/ay")));
      }
    }
  }

  if (j.contains("gauges")) {
    const json& gauges = j["gauges"];
    if (!gauges.is_object()) schema_fail("/gauges", "expected an object keyed by name");
    for (const auto& [name, val] : gauges.items()) {
      const std::string w = "/gauges/" + name;
      const int n = integer(require(val, "n", w), w + "/n");
      if (n < 1 || n > kMaxDim) schema_fail(w + "/n", "n out of range");
      PolyField<cplx> u(n, n);
      if (val.contains("w")) {
        // u = Id + rho W equals Id on the boundary by construction
        u = PolyField<cplx>::constant(identity(n)) + defining_function<cplx>(radius) * matrix_poly(val["w"], n, n, w + "/w");
      } else {
        u = matrix_poly(require(val, "u", w), n, n, w + "/u");
      }
      try {
        s.gauges.emplace(name, GaugeElement::certify(u, s.disk.surface));
      } catch (const SingularGauge& e) {
        schema_fail(w, e.what());
      }
    }
  }

  certify(s);
  return s;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path + ": cannot open config");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

Scenario parse_scenario(const std::string& path) {
  const json j = load_config(path);
  try {
    return scenario_from_json(j, path);
  } catch (const SchemaError& e) {
    throw SchemaError(path + e.what());
  }
}

json certification_json(const Scenario& s) {
  auto state = [](const PhaseState& p) { return json::array({p.x, p.y, p.theta}); };
  const auto& ec = s.ext.certification;
  return {{"convexity_margin", s.convexity.min_margin},
          {"convexity_witness", state(s.convexity.witness)},
          {"probes", s.numerics.probes},
          {"extension",
           {{"delta", s.ext.delta},
            {"radius", s.ext.outer.surface.radius()},
            {"convexity_margin", ec.convexity.min_margin},
            {"max_exit_time", ec.max_exit_time},
            {"probes", ec.probes}}}};
}

}  // namespace twistray
