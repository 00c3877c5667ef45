#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "cascade/kernels.hpp"

using namespace cascade::kernels;

namespace {

struct TransformInput {
  std::vector<double> r, w, rho;
  std::vector<std::vector<double>> f;
  RadialTransformBatch batch;

  TransformInput(std::size_t n, std::size_t m, std::size_t nf) {
    const double h = 40.0 / n;
    for (std::size_t j = 0; j < n; ++j) {
      r.push_back((j + 1) * h);
      w.push_back(4.0 * M_PI * h * r.back() * r.back());
    }
    for (std::size_t i = 0; i <= m; ++i) rho.push_back(14.0 * i / m);
    f.assign(nf, std::vector<double>(n));
    for (std::size_t k = 0; k < nf; ++k)
      for (std::size_t j = 0; j < n; ++j) f[k][j] = std::exp(-r[j] * r[j] / (20.0 + k));
    batch = {r, w, rho, {}};
    for (const auto& x : f) batch.functions.emplace_back(x);
  }
};

struct ContractionInput {
  std::vector<cplx> M, F, out;
  std::vector<double> dE;

  explicit ContractionInput(std::size_t K) : M(K * K * K * K), F(K), out(K), dE(M.size()) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (std::size_t q = 0; q < M.size(); ++q) {
      M[q] = {n(rng), n(rng)};
      dE[q] = n(rng);
    }
    for (auto& z : F) z = {n(rng), n(rng)};
  }
};

void BM_transform_serial(benchmark::State& st) {
  TransformInput in(2000, 4096, 21);
  for (auto _ : st) benchmark::DoNotOptimize(serial::radial_transform(in.batch));
}

void BM_transform_omp(benchmark::State& st) {
  TransformInput in(2000, 4096, 21);
  set_threads(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(omp::radial_transform(in.batch));
}

void BM_contraction_serial(benchmark::State& st) {
  const auto K = static_cast<std::size_t>(st.range(0));
  ContractionInput in(K);
  const PrelimitContraction c{K, in.M, in.dE, 100.0};
  for (auto _ : st) {
    serial::prelimit_contraction(c, in.F, in.out);
    benchmark::DoNotOptimize(in.out.data());
  }
}

void BM_contraction_omp(benchmark::State& st) {
  const auto K = static_cast<std::size_t>(st.range(0));
  ContractionInput in(K);
  const PrelimitContraction c{K, in.M, in.dE, 100.0};
  for (auto _ : st) {
    omp::prelimit_contraction(c, in.F, in.out);
    benchmark::DoNotOptimize(in.out.data());
  }
}

}  // namespace

BENCHMARK(BM_transform_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_transform_omp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_contraction_serial)->Arg(6)->Arg(12);
BENCHMARK(BM_contraction_omp)->Arg(6)->Arg(12);

BENCHMARK_MAIN();
