#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cascade/kernels.hpp"

using namespace cascade::kernels;

namespace {

struct Batch {
  std::vector<double> r, w, rho;
  std::vector<std::vector<double>> f;
  RadialTransformBatch view() const {
    RadialTransformBatch b{r, w, rho, {}};
    for (const auto& x : f) b.functions.emplace_back(x);
    return b;
  }
};

Batch make_batch(std::size_t n, std::size_t m, std::size_t nf) {
  Batch b;
  const double h = 10.0 / n;
  for (std::size_t j = 0; j < n; ++j) {
    b.r.push_back((j + 1) * h);
    b.w.push_back(4.0 * M_PI * h * b.r.back() * b.r.back());
  }
  for (std::size_t i = 0; i <= m; ++i) b.rho.push_back(8.0 * i / m);
  for (std::size_t f = 0; f < nf; ++f) {
    std::vector<double> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = std::exp(-(1.0 + f) * b.r[j] * b.r[j] / 4.0);
    b.f.push_back(v);
  }
  return b;
}

}  // namespace

TEST_CASE("radial transform variants agree bit for bit") {
  const auto b = make_batch(800, 300, 5);
  const auto s = serial::radial_transform(b.view());
  for (int threads : {1, 2, 4}) {
    set_threads(threads);
    CHECK(omp::radial_transform(b.view()) == s);
  }
  // rho = 0 gives the plain weighted sum
  double direct = 0.0;
  for (std::size_t j = 0; j < b.r.size(); ++j) direct += b.w[j] * b.f[2][j];
  CHECK(s[2][0] == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("prelimit contraction variants agree bit for bit") {
  const std::size_t K = 5;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  std::vector<cplx> M(K * K * K * K), F(K);
  std::vector<double> dE(M.size());
  for (std::size_t q = 0; q < M.size(); ++q) {
    M[q] = {n(rng), n(rng)};
    dE[q] = q % 7 == 0 ? 0.0 : n(rng);
  }
  for (auto& z : F) z = {n(rng), n(rng)};
  const PrelimitContraction c{K, M, dE, 3.7};
  std::vector<cplx> a(K), b(K);
  serial::prelimit_contraction(c, F, a);
  for (int threads : {1, 3}) {
    set_threads(threads);
    omp::prelimit_contraction(c, F, b);
    CHECK(a == b);
  }
  // reference by explicit quadruple sum
  for (std::size_t k = 0; k < K; ++k) {
    cplx ref = 0.0;
    for (std::size_t kp = 0; kp < K; ++kp)
      for (std::size_t j = 0; j < K; ++j)
        for (std::size_t jp = 0; jp < K; ++jp) {
          const auto q = ((k * K + kp) * K + j) * K + jp;
          ref += M[q] * std::exp(cplx(0.0, 3.7 * dE[q])) * F[j] * std::conj(F[jp]) * F[kp];
        }
    CHECK(std::abs(ref - a[k]) < 1e-12 * std::abs(ref));
  }
  CHECK(max_threads() >= 1);
}
