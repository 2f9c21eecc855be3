// twistray: scenario verification and data export.
//
// Exit codes: 0 all checks pass, 1 tolerance or numerical failure,
// 2 certification failure, 3 configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "twistray/errors.hpp"
#include "twistray/experiments.hpp"
#include "twistray/verify.hpp"

using namespace twistray;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kFail = 1, kUncertified = 2, kConfig = 3 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> step;
  std::string out;
};

Scenario load(const Common& c) {
  json j = load_config(c.config);
  if (c.seed) j["seed"] = *c.seed;
  if (c.step) j["numerics"]["h"] = *c.step;
  try {
    return scenario_from_json(j, c.config);
  } catch (const SchemaError& e) {
    throw SchemaError(c.config + e.what());
  }
}

std::vector<double> parse_numbers(const std::string& text, std::size_t count, const std::string& flag) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw SchemaError(flag + ": '" + item + "' is not a number");
    }
  }
  if (v.size() != count) throw SchemaError(flag + ": expected " + std::to_string(count) + " comma-separated numbers");
  return v;
}

/// Writes through a callback to --out, or stdout when it is empty or "-".
void emit(const std::string& path, const std::function<void(std::ostream&)>& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw SchemaError("cannot open '" + path + "' for writing");
  write(f);
}

void add_common(CLI::App* sub, Common& c, bool needs_out) {
  sub->add_option("--config", c.config, "scenario JSON file")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "override the config seed");
  sub->add_option("--step", c.step, "override the integrator step h");
  if (needs_out) sub->add_option("--out", c.out, "output file (default stdout)");
}

int run_verify_cmd(const Common& c, const std::vector<std::string>& suites, const std::string& json_path) {
  const Scenario s = load(c);
  const VerifyReport rep = run_verify(s, suites.empty() ? suite_names() : suites);
  for (const auto& r : rep.checks) {
    if (r.skipped) {
      std::printf("SKIP %s/%s  %s\n", r.suite.c_str(), r.name.c_str(), r.note.c_str());
      continue;
    }
    const char* status = r.pass() ? "PASS" : "FAIL";
    std::printf("%s %s/%s value=%.3e %s %.1e%s%s\n", status, r.suite.c_str(), r.name.c_str(), r.value,
                r.lower_bound ? ">" : "<", r.tolerance, r.note.empty() ? "" : "  ", r.note.c_str());
  }
  if (!json_path.empty()) emit(json_path, [&](std::ostream& os) { os << rep.to_json(s).dump(2) << "\n"; });
  return rep.pass() ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twisted ray transforms on conformal disks: verification and export"};
  app.require_subcommand(1);

  Common c;
  std::vector<std::string> suites;
  std::string json_path, pair, source, fan = "16x8", state, point = "0,0";

  auto* verify = app.add_subcommand("verify", "run verification suites");
  add_common(verify, c, false);
  verify->add_option("--suite", suites, "suites to run (default all)")->delimiter(',');
  verify->add_option("--json", json_path, "write the JSON report here");

  auto* scatter = app.add_subcommand("scatter", "scattering data over a boundary fan (CSV)");
  add_common(scatter, c, true);
  scatter->add_option("--pair", pair, "attenuation pair name")->required();
  scatter->add_option("--fan", fan, "<n_beta>x<n_alpha>");

  auto* transform = app.add_subcommand("transform", "attenuated transform over a boundary fan (CSV)");
  add_common(transform, c, true);
  transform->add_option("--pair", pair, "attenuation pair name")->required();
  transform->add_option("--source", source, "source name")->required();
  transform->add_option("--fan", fan, "<n_beta>x<n_alpha>");

  auto* trace = app.add_subcommand("trace", "one lambda-geodesic (CSV)");
  add_common(trace, c, true);
  trace->add_option("--state", state, "x,y,theta")->required();

  auto* factorize = app.add_subcommand("factorize", "loop factorization at a base point (JSON)");
  add_common(factorize, c, true);
  factorize->add_option("--pair", pair, "attenuation pair name")->required();
  factorize->add_option("--point", point, "x,y");

  auto* modes = app.add_subcommand("modes", "fiber modes of the transport solution (JSON)");
  add_common(modes, c, true);
  modes->add_option("--pair", pair, "attenuation pair name")->required();
  modes->add_option("--source", source, "source name")->required();
  modes->add_option("--point", point, "x,y");

  auto* certify = app.add_subcommand("certify", "convexity and nontrapping certification");
  add_common(certify, c, false);
  certify->add_option("--json", json_path, "write the certification block here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfig;
  }

  try {
    if (verify->parsed()) return run_verify_cmd(c, suites, json_path);
    if (certify->parsed()) {
      const Scenario s = load(c);
      const json block = certification_json(s);
      std::printf("certified: convexity margin %.6g, extension margin %.6g\n", s.convexity.min_margin,
                  s.ext.certification.convexity.min_margin);
      if (!json_path.empty()) emit(json_path, [&](std::ostream& os) { os << block.dump(2) << "\n"; });
      return kPass;
    }
    const Scenario s = load(c);
    if (scatter->parsed()) {
      const FanSpec f = parse_fan(fan);
      emit(c.out, [&](std::ostream& os) { export_scatter(s, pair, f, os); });
    } else if (transform->parsed()) {
      const FanSpec f = parse_fan(fan);
      emit(c.out, [&](std::ostream& os) { export_transform(s, pair, source, f, os); });
    } else if (trace->parsed()) {
      const auto v = parse_numbers(state, 3, "--state");
      emit(c.out, [&](std::ostream& os) { export_trace(s, {v[0], v[1], v[2]}, os); });
    } else if (factorize->parsed()) {
      const auto v = parse_numbers(point, 2, "--point");
      const json j = export_factorize(s, pair, {v[0], v[1]});
      emit(c.out, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
    } else if (modes->parsed()) {
      const auto v = parse_numbers(point, 2, "--point");
      const json j = export_modes(s, pair, source, {v[0], v[1]});
      emit(c.out, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
    }
    return kPass;
  } catch (const SchemaError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfig;
  } catch (const CertificationFailed& e) {
    std::fprintf(stderr, "certification failed: %s\n", e.what());
    return kUncertified;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFail;
  }
}
