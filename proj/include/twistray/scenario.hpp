#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "twistray/flow.hpp"
#include "twistray/transport.hpp"

namespace twistray {

struct Numerics {
  double h = 0.0;         // integrator step; 0 means 1e-3 * diameter
  double time_cap = 0.0;  // 0 means 100 * diameter
  double eps_glance = 1e-3;
  double delta = 0.2;     // extension margin
  double h_fd = 1e-4;
  int n_theta = 256;
  int k_trunc = 64;
  int n_theta_modes = 32;  // fiber grid of the modes export
  int fan_beta = 8;        // default verification fan
  int fan_alpha = 8;
  int probes = 64;         // nontrapping probe rays at load time
  int loop_points = 2;     // base points of the loopfact suite
  std::map<std::string, double> tolerances;

  double tol(const std::string& key, double fallback) const {
    auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
  }
};

struct KernelSource {
  std::string pair;
  PolyField<cplx> p;
};

/// A certified experiment description.
struct Scenario {
  std::string origin;
  TwistedDisk disk;
  std::map<std::string, AttenuationPair> pairs;
  std::map<std::string, SourceTerm> sources;
  std::map<std::string, KernelSource> kernel_sources;  // subset of sources built by kernel_of
  std::map<std::string, GaugeElement> gauges;
  Numerics numerics;
  std::uint64_t seed = 1;
  ConvexityReport convexity;
  ExtendedScenario ext;

  FlowOptions flow() const { return {numerics.h, numerics.time_cap, numerics.eps_glance}; }
  const AttenuationPair& pair(const std::string& name) const;
  const SourceTerm& source(const std::string& name) const;
};

/// Builds and certifies a scenario. SchemaError carries a JSON pointer to the
/// offending entry; CertificationFailed carries the witness state.
Scenario scenario_from_json(const nlohmann::json& j, const std::string& origin = "<inline>");
Scenario parse_scenario(const std::string& path);

/// Reads the config without certifying (the certify subcommand reports on
/// failures itself).
nlohmann::json load_config(const std::string& path);

/// The certification block: margins, witness, extension data.
nlohmann::json certification_json(const Scenario& s);

}  // namespace twistray
