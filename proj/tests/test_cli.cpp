#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "twistray/errors.hpp"
#include "twistray/experiments.hpp"
#include "twistray/verify.hpp"

using namespace twistray;
using nlohmann::json;

namespace {

const std::string kConfigs = TWISTRAY_CONFIG_DIR;

json flat_config(double lambda) {
  json j = json::parse(R"({"surface": {"radius": 1.0}, "pairs": {}})");
  j["lambda"] = {{"kind", "constant"}, {"value", lambda}};
  return j;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TWISTRAY_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path.string();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

const CheckResult& find_check(const VerifyReport& rep, const std::string& name) {
  for (const auto& c : rep.checks)
    if (c.name == name) return c;
  throw std::runtime_error("no check named " + name);
}

}  // namespace

TEST_CASE("parse_scenario examples") {
  // Flat unit disk: margin = 1 + lambda sin(theta - beta), minimized at -lambda.
  const Scenario s = scenario_from_json(flat_config(0.3));
  CHECK(s.convexity.min_margin == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(s.pairs.empty());

  CHECK_THROWS_AS(scenario_from_json(flat_config(1.5)), CertificationFailed);

  const Scenario m = parse_scenario(kConfigs + "/magnetic_pair.json");
  CHECK(m.pairs.size() == 3);
  CHECK(m.pair("A").n() == 2);
  CHECK(m.convexity.min_margin > 0.0);
}

TEST_CASE("schema errors name the offending entry") {
  auto message = [](const json& j) {
    try {
      scenario_from_json(j);
    } catch (const SchemaError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  json j = flat_config(0.3);
  j.erase("surface");
  CHECK(message(j).find("surface") != std::string::npos);

  j = flat_config(0.3);
  j["lambda"] = {{"kind", "spiral"}};
  CHECK(message(j).find("lambda") != std::string::npos);

  j = flat_config(0.3);
  j["lambda"] = json::parse(R"({"kind": "modes", "modes": {"1": [[0, 0, 0.1]]}})");
  CHECK(!message(j).empty());

  j = flat_config(0.0);
  j["sources"] = json::parse(R"({"k": {"kernel_of": {"pair": "missing", "p": {"terms": []}}}})");
  CHECK(message(j).find("missing") != std::string::npos);

  const Scenario s = scenario_from_json(flat_config(0.0));
  CHECK_THROWS_AS(s.pair("nope"), SchemaError);
  CHECK_THROWS_AS(parse_fan("64by32"), SchemaError);
  CHECK(parse_fan("64x32").n_alpha == 32);
}

TEST_CASE("exit codes") {
  CHECK(run_cli("verify --config " + kConfigs + "/flat_trivial.json --suite structure") == 0);
  CHECK(run_cli("verify --config " + kConfigs + "/uncertified.json") == 2);
  CHECK(run_cli("certify --config " + kConfigs + "/uncertified.json") == 2);
  CHECK(run_cli("verify --config " + write_temp("twistray_bad.json", R"({"pairs": {}})")) == 3);
  CHECK(run_cli("verify --config " + write_temp("twistray_broken.json", "{ not json")) == 3);
  CHECK(run_cli("verify --config /nonexistent/config.json") == 3);
  CHECK(run_cli("verify --config " + kConfigs + "/flat_trivial.json --suite nosuch") == 3);
  const std::string strict = write_temp(
      "twistray_strict.json",
      R"({"surface": {"radius": 1.0}, "lambda": {"kind": "zero"}, "pairs": {},
          "numerics": {"tolerances": {"structure": 1e-30}}})");
  CHECK(run_cli("verify --config " + strict + " --suite structure") == 1);
}

TEST_CASE("trivial scenario passes every suite") {
  const Scenario s = parse_scenario(kConfigs + "/flat_trivial.json");
  const auto t0 = std::chrono::steady_clock::now();
  const VerifyReport rep = run_verify(s, suite_names());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& c : rep.checks) CHECK_MESSAGE(c.pass(), c.suite, "/", c.name, " ", c.value, " ", c.note);
  CHECK(rep.pass());
  CHECK(secs < 60.0);

  const json j = rep.to_json(s);
  CHECK(j["pass"] == true);
  CHECK(j["seed"] == 1);
  for (const auto& name : suite_names()) {
    REQUIRE(j["suites"].contains(name));
    for (const auto& c : j["suites"][name]["checks"]) CHECK(!c["anchor"].get<std::string>().empty());
  }
}

TEST_CASE("magnetic pair pseudolinearization") {
  const Scenario s = parse_scenario(kConfigs + "/magnetic_pair.json");
  const VerifyReport rep = run_verify(s, {"pseudolinearization"});
  CHECK(rep.pass());
  bool seen = false;
  for (const auto& c : rep.checks) {
    if (c.skipped) continue;
    seen = true;
    CHECK(c.value < 1e-5);
  }
  CHECK(seen);
}

TEST_CASE("obstruction report carries the witness") {
  const Scenario s = parse_scenario(kConfigs + "/degree3.json");
  const VerifyReport rep = run_verify(s, {"obstruction"});
  const CheckResult& c = find_check(rep, "obstruction_witness");
  CHECK(c.value > 0.1);
  CHECK(rep.pass());
  CHECK(rep.to_json(s).dump().find("-2") != std::string::npos);
}

TEST_CASE("scatter export matches the chord oracle") {
  const Scenario s = parse_scenario(kConfigs + "/flat_constant.json");
  std::ostringstream os;
  export_scatter(s, "c", {64, 32}, os);
  const auto rows = csv_rows(os.str());
  REQUIRE(rows.size() == 64 * 32 + 2);
  CHECK(rows.front() == std::vector<std::string>{"beta", "alpha_angle", "C0_re", "C0_im"});
  CHECK(rows.back() == std::vector<std::string>{"# skipped", "0"});
  const cplx c(0.4, -0.3);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    const double alpha = std::stod(rows[i][1]);
    const cplx expected = std::exp(c * (2.0 * std::cos(alpha)));
    worst = std::max(worst, std::abs(cplx(std::stod(rows[i][2]), std::stod(rows[i][3])) - expected));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("trace export follows the circular arc") {
  // lambda = 0.5 on the flat disk: circles of radius 2 traversed at unit speed.
  const Scenario s = scenario_from_json(flat_config(0.5));
  const PhaseState s0{0.1, -0.2, 0.7};
  std::ostringstream os;
  export_trace(s, s0, os);
  const auto rows = csv_rows(os.str());
  REQUIRE(rows.size() > 10);
  CHECK(rows.front() == std::vector<std::string>{"t", "x", "y", "theta"});
  const double b = 0.5, rr = 1.0 / b;
  const double cx = s0.x - std::sin(s0.theta) / b, cy = s0.y + std::cos(s0.theta) / b;
  double worst = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double t = std::stod(rows[i][0]);
    const double a = s0.theta + b * t;
    worst = std::max(worst, std::hypot(std::stod(rows[i][1]) - (cx + rr * std::sin(a)),
                                       std::stod(rows[i][2]) - (cy - rr * std::cos(a))));
  }
  CHECK(worst < 1e-8);
  const double x_end = std::stod(rows.back()[1]), y_end = std::stod(rows.back()[2]);
  CHECK(std::abs(std::hypot(x_end, y_end) - 1.0) < 1e-8);
}

TEST_CASE("modes export of a kernel element") {
  // u = -p = -(1 - |x|^2) q with q = 1, a single fiber-independent mode.
  const Scenario s = parse_scenario(kConfigs + "/flat_trivial.json");
  const json j = export_modes(s, "trivial", "rho", {0.3, 0.2});
  REQUIRE(j["coefficients"].size() == 1);
  const auto c0 = j["coefficients"]["0"][0];
  CHECK(std::abs(c0[0].get<double>() + 0.87) < 1e-8);
  CHECK(std::abs(c0[1].get<double>()) < 1e-8);
  CHECK_THROWS_AS(export_modes(s, "trivial", "nope", {0.0, 0.0}), SchemaError);
}

TEST_CASE("exports are deterministic") {
  const Scenario s = parse_scenario(kConfigs + "/magnetic_pair.json");
  auto scatter = [&] {
    std::ostringstream os;
    export_scatter(s, "A", {8, 4}, os);
    return os.str();
  };
  auto transform = [&] {
    std::ostringstream os;
    export_transform(s, "A", "plain", {8, 4}, os);
    return os.str();
  };
  CHECK(scatter() == scatter());
  CHECK(transform() == transform());

  const Scenario again = parse_scenario(kConfigs + "/magnetic_pair.json");
  std::ostringstream a, b;
  export_scatter(again, "A", {8, 4}, a);
  CHECK(a.str() == scatter());
  CHECK(export_modes(s, "A", "plain", {0.1, 0.1}).dump() == export_modes(again, "A", "plain", {0.1, 0.1}).dump());

  const std::string out1 = (std::filesystem::temp_directory_path() / "twistray_f1.json").string();
  const std::string out2 = (std::filesystem::temp_directory_path() / "twistray_f2.json").string();
  const std::string base = "factorize --config " + kConfigs + "/flat_constant.json --pair c --point 0.2,0.1 --out ";
  REQUIRE(run_cli(base + out1) == 0);
  REQUIRE(run_cli(base + out2) == 0);
  std::ifstream f1(out1), f2(out2);
  const std::string t1((std::istreambuf_iterator<char>(f1)), {}), t2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(!t1.empty());
  CHECK(t1 == t2);
}
