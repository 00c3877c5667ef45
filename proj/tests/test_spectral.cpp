#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cascade/error.hpp"
#include "cascade/spectral.hpp"
#include "oracles.hpp"

using namespace cascade;
using oracle::pi;

namespace {

SpectralDensity constant_density(double R, std::size_t n) {
  MomentumGrid m(R, n);
  return SpectralDensity(m, std::vector<cplx>(m.size(), 1.0));
}

// a(rho) = 4 pi rho^2 e^{-rho^2}: the density of the pair f = g = e^{-r^2/2}.
double gauss_pair(double rho) { return 4.0 * pi * rho * rho * std::exp(-rho * rho); }

SpectralDensity gauss_pair_density(double R = 8.0, std::size_t n = 4096) {
  MomentumGrid m(R, n);
  std::vector<double> fh(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) fh[i] = oracle::gaussian_transform(1.0, 1.0, m[i]);
  return spectral_density(fh, fh, m);
}

}  // namespace

TEST_CASE("density of the Gaussian pair") {
  const auto a = gauss_pair_density();
  for (std::size_t i = 0; i < a.grid().size(); i += 97) {
    CHECK(a.values()[i].real() >= 0.0);
    CHECK(a.values()[i].imag() == 0.0);
    CHECK(a.values()[i].real() == doctest::Approx(gauss_pair(a.grid()[i])).epsilon(1e-12));
  }
  CHECK(a.at(1.2345).real() == doctest::Approx(gauss_pair(1.2345)).epsilon(1e-10));
  // Plancherel: <f, f> = pi^{3/2}
  CHECK(a.integral().real() == doctest::Approx(std::pow(pi, 1.5)).epsilon(1e-6));
}

TEST_CASE("Plancherel for distinct Gaussians") {
  MomentumGrid m(12.0, 4096);
  std::vector<double> fh(m.size()), gh(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    fh[i] = oracle::gaussian_transform(2.0, 0.8, m[i]);
    gh[i] = oracle::gaussian_transform(0.5, 1.5, m[i]);
  }
  const auto a = spectral_density(fh, gh, m);
  // <f, g> = A B (2 pi a^2 b^2 / (a^2 + b^2))^{3/2}
  const double direct = 2.0 * 0.5 * std::pow(2.0 * pi * 0.64 * 2.25 / (0.64 + 2.25), 1.5);
  CHECK(a.integral().real() == doctest::Approx(direct).epsilon(1e-6));
}

TEST_CASE("constant density on [0, 2]") {
  const auto a = constant_density(2.0, 256);
  const auto lim = cauchy_transform_limit(a, 1.0);
  CHECK(std::abs(lim.real()) < 1e-12);
  CHECK(lim.imag() == doctest::Approx(-pi).epsilon(1e-12));
  const auto one = cauchy_transform(a, 1.0, 1.0);
  CHECK(std::abs(one.real()) < 1e-12);
  CHECK(one.imag() == doctest::Approx(-pi / 2).epsilon(1e-12));
  // log((2 - l + i e) / (-l + i e)) off centre
  const auto off = cauchy_transform(a, 0.3, 0.05);
  const auto ref = std::log(cplx(1.7, 0.05)) - std::log(cplx(-0.3, 0.05));
  CHECK(std::abs(off - ref) < 1e-12);
}

TEST_CASE("Cauchy transform against adaptive quadrature") {
  const auto a = gauss_pair_density();
  for (double lambda : {0.4, 1.0, 1.7, 3.2}) {
    for (double eps : {0.3, 1e-2, 1e-4}) {
      const auto got = cauchy_transform(a, lambda, eps);
      const auto ref = oracle::cauchy(gauss_pair, 8.0, lambda, eps);
      CHECK(std::abs(got - ref) < 1e-8);
    }
    const auto lim = cauchy_transform_limit(a, lambda);
    const auto ref0 = oracle::cauchy(gauss_pair, 8.0, lambda, 0.0);
    CHECK(std::abs(lim - ref0) < 1e-8);
  }
}

TEST_CASE("Sokhotski-Plemelj rate") {
  const auto a = gauss_pair_density();
  for (double lambda : {0.5, 1.0, 2.0}) {
    const double C = plemelj_constant(a, lambda);
    CHECK(std::isfinite(C));
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const double err = std::abs(cauchy_transform(a, lambda, eps).imag() + pi * gauss_pair(lambda));
      CHECK(err <= C * eps * std::log(1.0 / eps));
    }
  }
}

TEST_CASE("shifted pole and pairing dispatch") {
  const auto a = gauss_pair_density();
  // 1/(rho + 1.5) has no singularity on [0, 8]
  const double ref = oracle::integrate([](double r) { return gauss_pair(r) / (r + 1.5); }, 0.0, 8.0);
  CHECK(cauchy_transform_shifted(a, -1.5, 0.0).real() == doctest::Approx(ref).epsilon(1e-9));
  CHECK(std::abs(cauchy_transform_shifted(a, -1.5, 0.0).imag()) < 1e-15);
  CHECK(resolvent_pairing(a, -1.5, 0.0) == cauchy_transform_shifted(a, -1.5, 0.0));
  CHECK(resolvent_pairing(a, 1.5, 1e-3) == cauchy_transform(a, 1.5, 1e-3));
  CHECK(resolvent_pairing(a, 1.5, 0.0) == cauchy_transform_limit(a, 1.5));
  // Delta E = 0 merges both branches: 2 PV \int a / rho
  const double ref0 = oracle::integrate([](double r) { return 4.0 * pi * r * std::exp(-r * r); }, 0.0, 8.0);
  const auto zero = resolvent_pairing(a, 0.0, 0.0);
  CHECK((2.0 * zero.real()) == doctest::Approx(2.0 * ref0).epsilon(1e-9));
  CHECK_THROWS_AS(resolvent_pairing(a, 9.0, 0.0), Error);
  CHECK_THROWS_AS(cauchy_transform(a, 1.0, 0.0), Error);
}

TEST_CASE("Richardson extrapolation removes eps and eps^2 terms") {
  auto f = [](double e) { return 2.0 + 3.0 * e - 5.0 * e * e; };
  CHECK(richardson3(f(0.1), f(0.05), f(0.025)) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("limiting absorption probe") {
  const auto a = gauss_pair_density();
  const double eps[] = {1.0, 1e-1, 1e-2, 1e-3, 1e-4};
  const auto rep = lap_uniformity_probe(a, 0.5, 2.0, eps);
  REQUIRE(rep.rows.size() == 5);
  CHECK(rep.growth_ratio < 10.0);
  CHECK_FALSE(rep.flagged);
  CHECK(rep.holder_quotient > 0.0);

  const auto c = constant_density(4.0, 512);
  const auto sym = lap_uniformity_probe(c, 1.9, 2.1, eps, 10.0, 3);
  for (const auto& row : sym.rows) CHECK(row.sup_abs_real < 0.2);

  const auto empty = lap_uniformity_probe(a, 0.5, 2.0, std::span<const double>{});
  CHECK(empty.rows.empty());
  CHECK_FALSE(empty.flagged);
}
