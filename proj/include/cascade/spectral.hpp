#pragma once

#include <complex>
#include <span>
#include <vector>

#include "cascade/radial_fourier.hpp"

namespace cascade {

using cplx = std::complex<double>;

/// Spectral density a(rho) of the half-wave operator |nabla| for a pair of
/// radial source functions, sampled on a momentum grid. Off-grid values come
/// from the local cubic through the four nodes surrounding the query.
class SpectralDensity {
 public:
  SpectralDensity(MomentumGrid grid, std::vector<cplx> values);

  const MomentumGrid& grid() const noexcept { return grid_; }
  std::span<const cplx> values() const noexcept { return values_; }

  cplx at(double rho) const;
  /// \int_0^{rho_max} a(rho) d rho (trapezoid).
  cplx integral() const;

 private:
  MomentumGrid grid_;
  std::vector<cplx> values_;
};

/// a(rho) = (2 pi)^{-3} 4 pi rho^2 fhat(rho) conj(ghat(rho)) for radial f, g.
SpectralDensity spectral_density(std::span<const double> fhat, std::span<const double> ghat,
                                 const MomentumGrid& grid);

/// \int a(rho) / (rho - lambda + i eps) d rho for lambda strictly inside the
/// grid and eps > 0. The singular part a(lambda) [log(rho - lambda + i eps)]
/// is taken in closed form; the remainder is integrated panel by panel
/// against the local cubic of a.
cplx cauchy_transform(const SpectralDensity& a, double lambda, double epsilon);

/// The eps -> 0+ limit of cauchy_transform: PV \int a/(rho - lambda) - i pi a(lambda).
cplx cauchy_transform_limit(const SpectralDensity& a, double lambda);

/// Pole at or below the left end of the grid (lambda <= 0), eps >= 0; used for
/// the second resolvent branch 1/(rho + |dE| + i eps).
cplx cauchy_transform_shifted(const SpectralDensity& a, double lambda, double epsilon);

/// Dispatches to the three routines above; eps == 0 means the limit.
cplx resolvent_pairing(const SpectralDensity& a, double lambda, double epsilon);

/// Three-point Richardson extrapolation to eps -> 0 from f(eps), f(eps/2),
/// f(eps/4), eliminating the O(eps) and O(eps^2) terms.
template <class T>
T richardson3(const T& f1, const T& f2, const T& f4) {
  const T r1 = 2.0 * f2 - f1;
  const T r2 = 2.0 * f4 - f2;
  return (4.0 * r2 - r1) / 3.0;
}

/// Constant C in |Im cauchy_transform(a, lambda, eps) + pi a(lambda)| <= C eps log(1/eps),
/// valid for eps <= 0.1, from the Lipschitz constant L of a on the grid:
/// the Poisson-kernel error is at most eps [L log(1 + R^2/eps^2) + |a(lambda)| (1/lambda + 1/(rho_max - lambda))]
/// with R = max(lambda, rho_max - lambda).
double plemelj_constant(const SpectralDensity& a, double lambda);

struct LapProbeRow {
  double epsilon;
  double sup_abs;      // sup over the lambda window of |cauchy_transform|
  double sup_abs_real; // sup of |Re cauchy_transform| (principal-value part)
};

struct LapProbeReport {
  std::vector<LapProbeRow> rows;  // in the order of the supplied eps list
  double holder_alpha = 0.5;
  double holder_quotient = 0.0;   // sup |a(l) - a(l')| / |l - l'|^alpha on the window
  double growth_ratio = 0.0;      // sup at smallest eps / sup at largest eps
  bool flagged = false;           // monotone growth beyond the tolerance factor
};

/// Empirical limiting-absorption probe: tabulates the Cauchy transform over a
/// window of spectral parameters and a list of regularisations.
LapProbeReport lap_uniformity_probe(const SpectralDensity& a, double lambda_lo, double lambda_hi,
                                    std::span<const double> eps_list, double growth_factor = 10.0,
                                    std::size_t n_lambda = 33, double holder_alpha = 0.5);

}  // namespace cascade
