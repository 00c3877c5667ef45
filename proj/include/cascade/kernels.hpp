#pragma once

// Data-parallel inner loops. Each kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp; both evaluate every
// output entry with the same inner summation order, so their results agree
// bit for bit regardless of the thread count.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cascade::kernels {

using cplx = std::complex<double>;

/// Inputs of a batched radial Fourier transform
///   out[f][i] = sum_j weights[j] * sin(rho_i r_j) / (rho_i r_j) * functions[f][j],
/// where weights already contain the quadrature weight, 4 pi and r_j^2.
struct RadialTransformBatch {
  std::span<const double> radii;
  std::span<const double> weights;
  std::span<const double> momenta;
  std::vector<std::span<const double>> functions;
};

/// Cubic contraction of the oscillatory modal system
///   out[k] = sum_{k',j,j'} M[k,k',j,j'] exp(i phase_rate dE[k,k',j,j']) F_j conj(F_j') F_k'
/// with row-major quadruple indexing ((k K + k') K + j) K + j'. Entries whose
/// mismatch is exactly zero skip the exponential.
struct PrelimitContraction {
  std::size_t K;
  std::span<const cplx> coefficients;
  std::span<const double> mismatch;
  double phase_rate;
};

namespace serial {
std::vector<std::vector<double>> radial_transform(const RadialTransformBatch& batch);
void prelimit_contraction(const PrelimitContraction& c, std::span<const cplx> F,
                          std::span<cplx> out);
}  // namespace serial

namespace omp {
std::vector<std::vector<double>> radial_transform(const RadialTransformBatch& batch);
void prelimit_contraction(const PrelimitContraction& c, std::span<const cplx> F,
                          std::span<cplx> out);
}  // namespace omp

/// Threads the OpenMP kernels may use (1 when built without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace cascade::kernels
