#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cascade/config.hpp"
#include "cascade/error.hpp"
#include "cascade/io.hpp"
#include "cascade/pipeline.hpp"
#include "oracles.hpp"

using namespace cascade;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::numerical;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("cascade_test_config_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("minimal file takes defaults") {
  const auto c = parse_config_text("[trap]\nK = 3\n");
  SimulationConfig ref;
  ref.trap.K = 3;
  CHECK(c == ref);
  CHECK(parse_config_text("") == SimulationConfig{});
  CHECK(parse_config_text("; comment\n# another\n[output]\ndir = x\n").output.dir == "x");
}

TEST_CASE("parse errors") {
  CHECK(kind_of([] { parse_config_text("[trap]\nKK = 3\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config_text("[traps]\nK = 3\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config_text("K = 3\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config_text("[trap]\nK = three\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config_text("[trap]\nK = 3.5\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config_text("[trap]\nr_max = 1e400\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config_text("[dynamics]\nnormalize = yes\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config_text("[trap\nK = 3\n"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_config("/nonexistent/cascade.ini"); }) == ErrorKind::config);
}

TEST_CASE("validation") {
  CHECK_NOTHROW(validate(SimulationConfig{}));
  auto bad = [](auto edit) {
    SimulationConfig c;
    edit(c);
    return kind_of([&] { validate(c); });
  };
  CHECK(bad([](SimulationConfig& c) { c.trap.n_points = -5; }) == ErrorKind::validation);
  CHECK(bad([](SimulationConfig& c) { c.trap.K = 600; }) == ErrorKind::validation);
  CHECK(bad([](SimulationConfig& c) { c.trap.omega = 0.0; }) == ErrorKind::validation);
  CHECK(bad([](SimulationConfig& c) { c.trap.kind = "box"; }) == ErrorKind::validation);
  CHECK(bad([](SimulationConfig& c) { c.kernels.s = 0.5; }) == ErrorKind::validation);
  CHECK(bad([](SimulationConfig& c) { c.sweep.etas = "0.1, 0.2"; }) == ErrorKind::validation);
  CHECK(bad([](SimulationConfig& c) { c.sweep.samples = 100; }) == ErrorKind::validation);
  CHECK(bad([](SimulationConfig& c) { c.dynamics.initial = "1 2 3 4 5 6 7"; }) == ErrorKind::validation);
  CHECK(bad([](SimulationConfig& c) { c.dynamics.coefficients = "logistic(-1)"; }) == ErrorKind::validation);
  CHECK(bad([](SimulationConfig& c) { c.conventions.epsilon_policy = "zero"; }) == ErrorKind::validation);
  CHECK(bad([](SimulationConfig& c) {
          c.dynamics.coefficients = "logistic(1)";
          c.dynamics.flow = "prelimit";
        }) == ErrorKind::validation);
}

TEST_CASE("round trip") {
  SimulationConfig c;
  c.trap.kind = "harmonic";
  c.trap.omega = 0.1 + 0.2;
  c.kernels.w_width = 1.0 / 3.0;
  c.dynamics.initial = "(0.5,0.25) 1 -0.5";
  c.dynamics.renormalize = true;
  c.sweep.etas = "0.3, 0.15";
  c.output.dir = "runs/a b";
  const auto text = emit_config(c);
  const auto back = parse_config_text(text);
  CHECK(back == c);
  CHECK(emit_config(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c) != config_hash(SimulationConfig{}));
  CHECK(config_hash(c).size() == 64);
}

TEST_CASE("initial data") {
  CHECK(initial_state("ground-only", 3, false) == StateVector{1.0, 0.0, 0.0});
  const auto two = initial_state("two-mode(0.25)", 3, false);
  CHECK(std::norm(two[0]) == doctest::Approx(0.25));
  CHECK(std::norm(two[1]) == doctest::Approx(0.75));
  const auto u = initial_state("uniform(4)", 6, true);
  CHECK(std::norm(u[0]) == doctest::Approx(0.25));
  CHECK(u[4] == cplx(0.0));
  const auto g = initial_state("geometric(0.5)", 3, false);
  CHECK(g == StateVector{1.0, 0.5, 0.25});
  const auto list = initial_state("(3,4) 0", 2, true);
  CHECK(list[0] == cplx(0.6, 0.8));
  CHECK(list[1] == cplx(0.0));
  CHECK(initial_state("uniform(7)", 3, false) == StateVector(3, 1.0 / std::sqrt(3.0)));
  CHECK(kind_of([] { initial_state("uniform(0)", 6, true); }) == ErrorKind::validation);
  CHECK(kind_of([] { initial_state("uniform(1.5)", 6, true); }) == ErrorKind::validation);
  CHECK(kind_of([] { initial_state("spiral(1)", 6, true); }) == ErrorKind::validation);
  CHECK(kind_of([] { initial_state("0 0", 2, true); }) == ErrorKind::validation);
  CHECK(kind_of([] { initial_state("1 x", 2, true); }) == ErrorKind::validation);
  CHECK(parse_eta_list("0.2, 0.1,0.05") == std::vector<double>{0.2, 0.1, 0.05});
  CHECK(parse_eta_list("").empty());
  CHECK(!synthetic_rate("computed"));
  CHECK(*synthetic_rate("logistic( 1.5 )") == 1.5);
}

TEST_CASE("spectrum run with a harmonic trap") {
  SimulationConfig c;
  c.trap.kind = "harmonic";
  c.trap.omega = 1.0;
  c.trap.r_max = 12.0;
  c.trap.K = 3;
  const auto dir = scratch("spectrum");
  CHECK(run(Command::spectrum, c, {dir, {}}) == 0);
  const auto csv = slurp(dir / "basis.csv");
  const auto pos = csv.find("# energies=");
  REQUIRE(pos != std::string::npos);
  std::istringstream line(csv.substr(pos + 11, csv.find('\n', pos) - pos - 11));
  for (double expected : {3.0, 7.0, 11.0}) {
    double e = 0.0;
    line >> e;
    CHECK(std::abs(e - expected) / expected < 1e-6);
  }
  CHECK(csv.find("# config_sha256=" + config_hash(c)) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "resonance.json"));
  CHECK(report["collisions"].size() > 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["config"]["trap"]["kind"] == "harmonic");
  CHECK(manifest["config"]["dynamics"]["T_end"] == "200");
  CHECK(manifest["files"].size() == 2);
  CHECK(manifest["files"][0]["sha256"] == io::sha256_hex(csv));
}

TEST_CASE("logistic evolve run") {
  auto c = parse_config_text(
      "[trap]\nK = 2\n[dynamics]\ncoefficients = logistic(1)\ninitial = two-mode(0.5)\n"
      "T_end = 1\nsamples = 11\nrtol = 1e-11\natol = 1e-14\n");
  const auto dir = scratch("evolve");
  CHECK(run(Command::evolve, c, {dir, {}}) == 0);
  std::istringstream in(slurp(dir / "trajectory.csv"));
  std::string row;
  int n = 0;
  while (std::getline(in, row)) {
    if (row.empty() || row[0] == '#' || row[0] == 'T') continue;
    std::istringstream cells(row);
    std::string cell;
    std::vector<double> v;
    while (std::getline(cells, cell, ',')) v.push_back(std::stod(cell));
    const double x = oracle::logistic(0.5, 1.0, v[0]);
    CHECK(std::abs(v[1] * v[1] + v[2] * v[2] - x) < 1e-8);
    CHECK(std::abs(v[3] * v[3] + v[4] * v[4] - (1.0 - x)) < 1e-8);
    ++n;
  }
  CHECK(n == 11);
  const auto diag = nlohmann::json::parse(slurp(dir / "diagnostics.json"));
  for (const auto& chk : diag["checks"])
    if (chk["name"] == "mass_conservation") CHECK(chk["passed"] == true);
}

TEST_CASE("coefficient run with the tensor") {
  auto c = parse_config_text("[trap]\nK = 3\n[dynamics]\nflow = prelimit\neta = 0.2\n");
  const auto dir = scratch("coeffs");
  CHECK(run(Command::coeffs, c, {dir, {}}) == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "coefficients.json"));
  CHECK(doc["provenance"]["config_sha256"] == config_hash(c));
  CHECK(doc.contains("tensor"));
  CHECK(slurp(dir / "limit_matrix.csv").find("# conventions=fgr_pi:true") != std::string::npos);
}

TEST_CASE("run rejects invalid configurations") {
  SimulationConfig c;
  c.trap.n_points = -1;
  CHECK(kind_of([&] { run(Command::spectrum, c, {scratch("bad"), {}}); }) == ErrorKind::validation);
  CHECK(kind_of([] { parse_command("explode"); }) == ErrorKind::config);
  CHECK(parse_command("converge") == Command::converge);
  const auto rec = nlohmann::json::parse(error_record_json("check", "config", "config", "bad key", 2));
  CHECK(rec["exit_code"] == 2);
  CHECK(rec["error"]["message"] == "bad key");
}
