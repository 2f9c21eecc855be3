#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "twistray/scenario.hpp"

namespace twistray {

struct CheckResult {
  std::string suite;
  std::string name;
  std::string anchor;  // the identity being checked, quoted from its statement
  double value = 0.0;
  double tolerance = 0.0;
  bool lower_bound = false;  // pass when value > tolerance instead of value < tolerance
  bool skipped = false;
  std::string note;
  nlohmann::json detail = nlohmann::json::object();
  double runtime_s = 0.0;

  bool pass() const { return skipped || (lower_bound ? value > tolerance : value < tolerance); }
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool pass() const;
  nlohmann::json to_json(const Scenario& s) const;
};

/// structure, flow, cocycle, integrating-factor, pseudolinearization, gauge,
/// kernel, fourier, obstruction, loopfact.
const std::vector<std::string>& suite_names();

/// Runs the named suites in the listed order. Library errors inside a check
/// become failed entries with the message in the note.
VerifyReport run_verify(const Scenario& s, const std::vector<std::string>& suites);

}  // namespace twistray
