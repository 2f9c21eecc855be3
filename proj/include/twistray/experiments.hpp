#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "twistray/scenario.hpp"

namespace twistray {

struct FanSpec {
  int n_beta = 16;
  int n_alpha = 8;
};

/// "64x32" -> {64, 32}; SchemaError otherwise.
FanSpec parse_fan(const std::string& text);

/// C^lambda over the fan as CSV (beta, alpha_angle, C entries row-major).
void export_scatter(const Scenario& s, const std::string& pair, const FanSpec& fan, std::ostream& os);

/// I^lambda(f) over the fan as CSV (beta, alpha_angle, vector entries).
void export_transform(const Scenario& s, const std::string& pair, const std::string& source,
                      const FanSpec& fan, std::ostream& os);

/// One lambda-geodesic from s0 as CSV rows t, x, y, theta.
void export_trace(const Scenario& s, const PhaseState& s0, std::ostream& os);

/// F and U of the integrating-factor loop at a base point.
nlohmann::json export_factorize(const Scenario& s, const std::string& pair, const PlanePoint& p);

/// Fiber modes of the transport solution u of (X + lambda V)u + A u = -f,
/// u = 0 on the outflux boundary, at a base point.
nlohmann::json export_modes(const Scenario& s, const std::string& pair, const std::string& source,
                            const PlanePoint& p);

}  // namespace twistray
