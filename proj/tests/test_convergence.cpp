#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "cascade/config.hpp"
#include "cascade/convergence.hpp"
#include "cascade/error.hpp"
#include "cascade/pipeline.hpp"

using namespace cascade;

namespace {

const Model& model4() {
  static const Model m = build_model(SimulationConfig{}, 4);
  return m;
}

}  // namespace

TEST_CASE("default sweep converges") {
  const auto F0 = initial_state("uniform(4)", 4, true);
  const std::vector<double> etas{0.2, 0.1, 0.05};
  const auto r = eta_sweep(model4().resonance, F0, 1.0, etas);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.strictly_decreasing);
  CHECK(r.non_increasing);
  CHECK(r.reduction >= 2.0);
  CHECK(r.samples == 256);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r.rows[i].eta == etas[i]);
    CHECK(r.rows[i].epsilon == doctest::Approx(etas[i] * etas[i]).epsilon(1e-15));
    CHECK(r.rows[i].initial_distance == 0.0);
    CHECK(r.rows[i].terminal_distance <= r.rows[i].sup_distance);
    if (i > 0) CHECK(r.rows[i].sup_distance < r.rows[i - 1].sup_distance);
  }
  CHECK(r.limit_mass_drift < 1e-7);

  // bitwise reproducible, and the same serially
  const auto again = eta_sweep(model4().resonance, F0, 1.0, etas);
  SweepOptions serial;
  serial.parallel = false;
  const auto one = eta_sweep(model4().resonance, F0, 1.0, etas, serial);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(again.rows[i].sup_distance == r.rows[i].sup_distance);
    CHECK(again.rows[i].mass_drift == r.rows[i].mass_drift);
    CHECK(one.rows[i].sup_distance == r.rows[i].sup_distance);
  }
  CHECK(convergence_json(r, "{}") == convergence_json(again, "{}"));
}

TEST_CASE("diagonal tensor at vanishing eta reproduces the limit") {
  const auto F0 = initial_state("uniform(4)", 4, true);
  SweepOptions o;
  o.coefficients.filter = TensorFilter::diagonal;
  o.coefficients.direct_terms = false;
  o.coefficients.epsilon_policy = EpsilonPolicy::limit;
  const std::vector<double> eta{1e-3};
  const auto r = eta_sweep(model4().resonance, F0, 1.0, eta, o);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].sup_distance < 10.0 * o.solver.rtol);

  // with the direct terms the resonant filter keeps exactly the limit couplings
  SweepOptions d;
  d.coefficients.filter = TensorFilter::resonant;
  d.coefficients.epsilon_policy = EpsilonPolicy::limit;
  const auto rd = eta_sweep(model4().resonance, F0, 1.0, eta, d);
  CHECK(rd.rows[0].sup_distance < 10.0 * d.solver.rtol);
}

TEST_CASE("precomputed coefficient sets") {
  const auto& r = model4().resonance;
  const auto F0 = initial_state("geometric(0.6)", 4, true);
  const auto lim = r.assemble_limit_matrix();
  const std::vector<CoefficientSet> pre{r.assemble_prelimit_tensor(0.2), r.assemble_prelimit_tensor(0.1)};
  const auto a = eta_sweep(lim, pre, F0, 1.0);
  const std::vector<double> etas{0.2, 0.1};
  const auto b = eta_sweep(r, F0, 1.0, etas);
  REQUIRE(a.rows.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(a.rows[i].sup_distance == b.rows[i].sup_distance);
  CHECK_THROWS_AS(eta_sweep(lim, std::vector<CoefficientSet>{lim}, F0, 1.0), Error);
}

TEST_CASE("degenerate sweeps") {
  const auto F0 = initial_state("uniform(4)", 4, true);
  const auto empty = eta_sweep(model4().resonance, F0, 1.0, std::vector<double>{});
  CHECK(empty.rows.empty());
  CHECK_THROWS_AS(eta_sweep(model4().resonance, F0, 1.0, std::vector<double>{0.1, 0.2}), Error);
  CHECK_THROWS_AS(eta_sweep(model4().resonance, F0, 1.0, std::vector<double>{0.1, -0.2}), Error);
  SweepOptions o;
  o.coefficients.tensor_max_K = 3;
  try {
    eta_sweep(model4().resonance, F0, 1.0, std::vector<double>{0.1}, o);
    FAIL("expected the tensor guard to trip");
  } catch (const Error& e) {
    CHECK(e.code() == "dimension");
    CHECK(std::string(e.what()).find("eta = ") == 0);
  }
}

TEST_CASE("report output") {
  const auto F0 = initial_state("uniform(4)", 4, true);
  const auto r = eta_sweep(model4().resonance, F0, 1.0, std::vector<double>{0.2, 0.1});
  const auto doc = nlohmann::json::parse(convergence_json(r, R"({"config_sha256":"abc"})"));
  CHECK(doc["rows"].size() == 2);
  CHECK(doc["provenance"]["config_sha256"] == "abc");
  std::ostringstream csv;
  write_convergence_csv(csv, r, std::vector<std::string>{"x=1"});
  CHECK(csv.str().rfind("# x=1\neta,", 0) == 0);
}
