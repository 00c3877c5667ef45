#include "cascade/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cascade::kernels {

namespace {

inline double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// One momentum node of the batch; shared by both variants so the summation
// order is identical.
inline void transform_row(const RadialTransformBatch& b, std::size_t i,
                          std::vector<std::vector<double>>& out) {
  const double rho = b.momenta[i];
  const std::size_t nf = b.functions.size();
  for (std::size_t f = 0; f < nf; ++f) out[f][i] = 0.0;
  for (std::size_t j = 0; j < b.radii.size(); ++j) {
    const double kern = b.weights[j] * sinc(rho * b.radii[j]);
    for (std::size_t f = 0; f < nf; ++f) out[f][i] += kern * b.functions[f][j];
  }
}

inline cplx contraction_row(const PrelimitContraction& c, std::span<const cplx> F,
                            std::size_t k) {
  const std::size_t K = c.K;
  cplx acc{0.0, 0.0};
  for (std::size_t kp = 0; kp < K; ++kp) {
    for (std::size_t j = 0; j < K; ++j) {
      const cplx fj_fkp = F[j] * F[kp];
      const std::size_t base = ((k * K + kp) * K + j) * K;
      for (std::size_t jp = 0; jp < K; ++jp) {
        const std::size_t q = base + jp;
        cplx m = c.coefficients[q];
        if (m == cplx{}) continue;
        const double de = c.mismatch[q];
        if (de != 0.0) m *= std::polar(1.0, c.phase_rate * de);
        acc += m * fj_fkp * std::conj(F[jp]);
      }
    }
  }
  return acc;
}

std::vector<std::vector<double>> allocate(const RadialTransformBatch& b) {
  return std::vector<std::vector<double>>(b.functions.size(),
                                          std::vector<double>(b.momenta.size(), 0.0));
}

}  // namespace

namespace serial {

std::vector<std::vector<double>> radial_transform(const RadialTransformBatch& batch) {
  auto out = allocate(batch);
  for (std::size_t i = 0; i < batch.momenta.size(); ++i) transform_row(batch, i, out);
  return out;
}

void prelimit_contraction(const PrelimitContraction& c, std::span<const cplx> F,
                          std::span<cplx> out) {
  for (std::size_t k = 0; k < c.K; ++k) out[k] = contraction_row(c, F, k);
}

}  // namespace serial

namespace omp {

std::vector<std::vector<double>> radial_transform(const RadialTransformBatch& batch) {
  auto out = allocate(batch);
  const auto n = static_cast<std::ptrdiff_t>(batch.momenta.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) transform_row(batch, static_cast<std::size_t>(i), out);
  return out;
}

void prelimit_contraction(const PrelimitContraction& c, std::span<const cplx> F,
                          std::span<cplx> out) {
  const auto K = static_cast<std::ptrdiff_t>(c.K);
#pragma omp parallel for schedule(static) if (K >= 8)
  for (std::ptrdiff_t k = 0; k < K; ++k)
    out[static_cast<std::size_t>(k)] = contraction_row(c, F, static_cast<std::size_t>(k));
}

}  // namespace omp

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace cascade::kernels
