#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cascade/error.hpp"
#include "cascade/radial_fourier.hpp"
#include "oracles.hpp"

using namespace cascade;

TEST_CASE("momentum grid") {
  const MomentumGrid m(10.0, 100);
  CHECK(m.size() == 101);
  CHECK(m[0] == 0.0);
  CHECK(m[100] == doctest::Approx(10.0));
  CHECK(m.spacing() == doctest::Approx(0.1));
  const auto d = MomentumGrid::for_max_gap(2.0);
  CHECK(d.rho_max() == doctest::Approx(16.0));
  CHECK(d.intervals() == 4096);
  CHECK_THROWS_AS(MomentumGrid(0.0, 100), Error);
}

TEST_CASE("Gaussian transforms to a Gaussian") {
  const RadialGrid g(14.0, 4000);
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = std::exp(-0.5 * g[i] * g[i]);
  const MomentumGrid m(4.0, 400);
  const auto fh = fourier_radial(g, f, m);
  double worst = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    worst = std::max(worst, std::abs(fh[i] - oracle::gaussian_transform(1.0, 1.0, m[i])) /
                                oracle::gaussian_transform(1.0, 1.0, m[i]));
  CHECK(worst < 1e-8);
  CHECK(fh[0] == doctest::Approx(g.integrate_r2(f)).epsilon(1e-14));
  CHECK(fourier_radial_at(g, f, 2.5) == doctest::Approx(oracle::gaussian_transform(1.0, 1.0, 2.5)).epsilon(1e-8));
}

TEST_CASE("unit ball indicator") {
  const RadialGrid g(2.0, 20000);
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = g[i] < 1.0 - 1e-12 ? 1.0 : (g[i] < 1.0 + 1e-12 ? 0.5 : 0.0);
  const MomentumGrid m(10.0, 50);
  const auto fh = fourier_radial(g, f, m);
  for (std::size_t i = 0; i < m.size(); ++i)
    CHECK(std::abs(fh[i] - oracle::ball_transform(m[i])) < 1e-6);
}

TEST_CASE("batched transform agrees with the single transform") {
  const RadialGrid g(10.0, 500);
  std::vector<double> a(g.size()), b(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    a[i] = std::exp(-g[i] * g[i]);
    b[i] = g[i] * std::exp(-g[i]);
  }
  const MomentumGrid m(6.0, 64);
  const std::vector<std::span<const double>> fs{a, b};
  const auto par = fourier_radial_batch(g, fs, m, true);
  const auto ser = fourier_radial_batch(g, fs, m, false);
  CHECK(par == ser);
  CHECK(par[1] == fourier_radial(g, b, m));
}

TEST_CASE("Gaussian kernel") {
  const RadialGrid g(12.0, 3000);
  const MomentumGrid m(10.0, 1000);
  const InteractionKernel w(KernelRole::photon_coupling, 3.0, 0.5, g, m);
  CHECK(w(0.0) == 3.0);
  CHECK(w(0.5) == doctest::Approx(3.0 * std::exp(-0.5)));
  for (std::size_t i = 0; i < m.size(); i += 50)
    CHECK(std::abs(w.transform()[i] - oracle::gaussian_transform(3.0, 0.5, m[i])) < 1e-10);
  CHECK(w.analytic_transform(1.3) == doctest::Approx(oracle::gaussian_transform(3.0, 0.5, 1.3)));

  const auto n = w.norms(g, 1.0);
  CHECK(n.linf == doctest::Approx(3.0));
  // L1 = A (2 pi s^2)^{3/2}, L2^2 = A^2 (pi s^2)^{3/2}
  CHECK(n.l1 == doctest::Approx(3.0 * std::pow(2 * oracle::pi * 0.25, 1.5)).epsilon(1e-8));
  CHECK(n.l2 == doctest::Approx(std::sqrt(9.0 * std::pow(oracle::pi * 0.25, 1.5))).epsilon(1e-8));
  CHECK(std::isfinite(n.weighted_l2));
  CHECK(n.weighted_l2 > n.l2);
  CHECK(to_string(KernelRole::pair_interaction) == "pair-interaction");
  CHECK_THROWS_AS(InteractionKernel(KernelRole::photon_coupling, 1.0, 0.0, g, m), Error);
}

TEST_CASE("real-space convolution of Gaussians") {
  const RadialGrid g(14.0, 2800);
  const MomentumGrid m(10.0, 64);
  const InteractionKernel w(KernelRole::photon_coupling, 3.0, 0.5, g, m);
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = 2.0 * std::exp(-0.5 * g[i] * g[i] / 1.44);
  const auto c = w.convolve(g, f);
  const double C = oracle::gaussian_convolution_amplitude(3.0, 0.5, 2.0, 1.2);
  const double s2 = 0.25 + 1.44;
  double worst = 0.0;
  for (std::size_t i = 0; i < g.size(); i += 7)
    worst = std::max(worst, std::abs(c[i] - C * std::exp(-0.5 * g[i] * g[i] / s2)));
  CHECK(worst < 1e-8 * C);
}
