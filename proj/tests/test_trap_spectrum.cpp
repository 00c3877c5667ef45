#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "cascade/error.hpp"
#include "cascade/trap_spectrum.hpp"
#include "oracles.hpp"

using namespace cascade;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Potential quartic() { return Potential::anharmonic(0.2, 1.0); }
}  // namespace

TEST_CASE("radial grid layout") {
  const RadialGrid g(10.0, 100);
  CHECK(g.size() == 100);
  CHECK(g[0] > 0.0);
  CHECK(g[99] == doctest::Approx(10.0).epsilon(1e-15));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
  CHECK_THROWS_AS(RadialGrid(10.0, 15), Error);
  CHECK_THROWS_AS(RadialGrid(-1.0, 100), Error);
}

TEST_CASE("harmonic spectrum is 4k + 3") {
  const auto b = solve_radial_eigenpairs(Potential::harmonic(1.0), RadialGrid(12.0, 2000), 6);
  REQUIRE(b.size() == 6);
  for (std::size_t k = 0; k < 6; ++k) CHECK(rel(b.energies[k], 4.0 * k + 3.0) < 1e-6);
}

TEST_CASE("harmonic ground state matches the Gaussian profile") {
  const RadialGrid g(12.0, 2000);
  const auto b = solve_radial_eigenpairs(Potential::harmonic(1.0), g, 1);
  // chi_0 = pi^{-3/4} e^{-r^2/2}
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    worst = std::max(worst, std::abs(b.modes[0][i] - std::pow(oracle::pi, -0.75) * std::exp(-0.5 * g[i] * g[i])));
  CHECK(worst < 1e-5);
}

TEST_CASE("quartic spectrum is increasing and stable under grid doubling") {
  const auto a = solve_radial_eigenpairs(quartic(), RadialGrid(8.0, 2000), 6);
  const auto b = solve_radial_eigenpairs(quartic(), RadialGrid(8.0, 4000), 6);
  for (std::size_t k = 0; k < 6; ++k) {
    if (k > 0) CHECK(a.energies[k] > a.energies[k - 1]);
    CHECK(rel(a.energies[k], b.energies[k]) < 1e-6);
  }
}

TEST_CASE("orthonormality and sign convention") {
  const auto b = solve_radial_eigenpairs(quartic(), RadialGrid(8.0, 2000), 6);
  std::vector<double> r(b.grid.nodes().begin(), b.grid.nodes().end());
  for (std::size_t j = 0; j < 6; ++j) {
    CHECK(b.modes[j][0] > 0.0);
    for (std::size_t k = 0; k < 6; ++k) {
      std::vector<double> p(r.size());
      for (std::size_t i = 0; i < r.size(); ++i) p[i] = b.modes[j][i] * b.modes[k][i];
      CHECK(std::abs(oracle::radial_sum(r, p) - (j == k ? 1.0 : 0.0)) < 1e-8);
    }
  }
}

TEST_CASE("dimension and truncation errors") {
  CHECK_THROWS_AS(solve_radial_eigenpairs(quartic(), RadialGrid(8.0, 400), 400), Error);
  CHECK_THROWS_AS(solve_radial_eigenpairs(quartic(), RadialGrid(8.0, 400), 0), Error);
  try {
    solve_radial_eigenpairs(Potential::harmonic(0.01), RadialGrid(5.0, 400), 3);
    FAIL("expected a truncation error");
  } catch (const Error& e) {
    CHECK(e.code() == "domain-truncation");
    CHECK(e.kind() == ErrorKind::numerical);
  }
}

TEST_CASE("gap independence") {
  EigenBasis eq{{3.0, 7.0, 11.0}, {}, RadialGrid(1.0, 16)};
  const auto rep = check_gap_independence(eq, 1e-8);
  bool found = false;
  for (const auto& q : rep.collisions) {
    found = found || q == Quadruple{0, 1, 1, 2};
    CHECK_FALSE((q[0] == q[2] && q[1] == q[3]));
  }
  CHECK(found);

  const auto b = solve_radial_eigenpairs(quartic(), RadialGrid(8.0, 2000), 6);
  const auto clean = check_gap_independence(b, 1e-8);
  CHECK(clean.collisions.empty());
  // brute force over all quadruples
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < 6; ++k)
    for (std::size_t kp = 0; kp < 6; ++kp)
      for (std::size_t j = 0; j < 6; ++j)
        for (std::size_t jp = 0; jp < 6; ++jp) {
          if ((k == j && kp == jp) || (k == kp && j == jp)) continue;
          const double d = (b.energies[k] - b.energies[kp]) - (b.energies[j] - b.energies[jp]);
          min_gap = std::min(min_gap, std::abs(d));
        }
  CHECK(clean.min_gap == doctest::Approx(min_gap).epsilon(1e-12));
  CHECK(min_gap > 1e-8);

  EigenBasis one{{1.0}, {}, RadialGrid(1.0, 16)};
  const auto r1 = check_gap_independence(one, 1e-8);
  CHECK(r1.collisions.empty());
  CHECK(std::isinf(r1.min_gap));
}

TEST_CASE("mismatch and trivially resonant quadruples") {
  const std::vector<double> E{1.0, 2.5, 4.5};
  CHECK(energy_mismatch(E, {2, 0, 1, 0}) == doctest::Approx(2.0));
  CHECK(energy_mismatch(E, {1, 2, 1, 2}) == 0.0);
  CHECK(is_trivially_resonant({1, 2, 1, 2}));
  CHECK(is_trivially_resonant({1, 1, 2, 2}));
  CHECK_FALSE(is_trivially_resonant({0, 1, 1, 2}));
}

TEST_CASE("mode products") {
  const auto b = solve_radial_eigenpairs(quartic(), RadialGrid(8.0, 2000), 3);
  CHECK(mode_product(b, 0, 1) == mode_product(b, 1, 0));
  CHECK(b.grid.integrate_r2(mode_product(b, 0, 0)) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(b.grid.integrate_r2(mode_product(b, 0, 1))) < 1e-10);
  CHECK_THROWS_AS(mode_product(b, 0, 3), Error);
}

TEST_CASE("potential coercivity and basis CSV") {
  const auto V = Potential::anharmonic(2e-4, 0.02);
  const RadialGrid g(40.0, 2000);
  const auto c = V.coercivity(g);
  CHECK(c.c > 0.0);
  CHECK(c.c0 >= 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(V(g[i]) >= c.c * g[i] - c.c0 - 1e-12);

  const auto b = solve_radial_eigenpairs(Potential::harmonic(1.0), RadialGrid(12.0, 64), 2);
  std::ostringstream out;
  write_basis_csv(out, b, Potential::harmonic(1.0));
  const auto s = out.str();
  CHECK(s.find("r,V,chi_0,chi_1\n") != std::string::npos);
  CHECK(s.find("# energies=") == 0);
}
