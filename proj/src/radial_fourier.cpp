#include "cascade/radial_fourier.hpp"

#include <cmath>
#include <numbers>

#include "cascade/error.hpp"
#include "cascade/kernels.hpp"

namespace cascade {

MomentumGrid::MomentumGrid(double rho_max, std::size_t n_intervals) : rho_max_(rho_max) {
  if (!(rho_max > 0.0) || !std::isfinite(rho_max))
    throw validation_error("momentum grid: rho_max must be positive and finite");
  if (n_intervals < 8) throw validation_error("momentum grid: need at least 8 intervals");
  h_ = rho_max / static_cast<double>(n_intervals);
  nodes_.resize(n_intervals + 1);
  for (std::size_t i = 0; i <= n_intervals; ++i) nodes_[i] = h_ * static_cast<double>(i);
  nodes_.back() = rho_max;
}

MomentumGrid MomentumGrid::for_max_gap(double max_gap, std::size_t n_intervals) {
  return MomentumGrid(4.0 * std::abs(max_gap) + 8.0, n_intervals);
}

double MomentumGrid::integrate(std::span<const double> f) const {
  if (f.size() != nodes_.size()) throw dimension_error("momentum integrate: size mismatch");
  double sum = 0.5 * (f.front() + f.back());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) sum += f[i];
  return h_ * sum;
}

std::vector<double> radial_weights(const RadialGrid& grid) {
  const double h = grid.spacing();
  std::vector<double> w(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    w[i] = 4.0 * std::numbers::pi * h * grid[i] * grid[i];
  w.back() *= 0.5;
  return w;
}

namespace {

void require_finite(std::span<const double> f, const char* what) {
  for (double x : f)
    if (!std::isfinite(x)) throw numerical_error("non-finite", std::string(what) + ": NaN/Inf in input");
}

}  // namespace

std::vector<std::vector<double>> fourier_radial_batch(
    const RadialGrid& grid, const std::vector<std::span<const double>>& functions,
    const MomentumGrid& momenta, bool parallel) {
  for (const auto& f : functions) {
    if (f.size() != grid.size()) throw dimension_error("fourier_radial: sample count mismatch");
    require_finite(f, "fourier_radial");
  }
  const auto weights = radial_weights(grid);
  const kernels::RadialTransformBatch batch{grid.nodes(), weights, momenta.nodes(), functions};
  return parallel ? kernels::omp::radial_transform(batch) : kernels::serial::radial_transform(batch);
}

std::vector<double> fourier_radial(const RadialGrid& grid, std::span<const double> f,
                                   const MomentumGrid& momenta) {
  auto out = fourier_radial_batch(grid, {f}, momenta);
  return std::move(out.front());
}

double fourier_radial_at(const RadialGrid& grid, std::span<const double> f, double rho) {
  if (f.size() != grid.size()) throw dimension_error("fourier_radial: sample count mismatch");
  require_finite(f, "fourier_radial");
  const auto weights = radial_weights(grid);
  double sum = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = rho * grid[j];
    sum += weights[j] * (x == 0.0 ? 1.0 : std::sin(x) / x) * f[j];
  }
  return sum;
}

InteractionKernel::InteractionKernel(KernelRole role, double amplitude, double width,
                                     const RadialGrid& grid, const MomentumGrid& momenta)
    : role_(role), amplitude_(amplitude), width_(width) {
  if (!std::isfinite(amplitude)) throw validation_error("kernel amplitude must be finite");
  if (!(width > 0.0) || !std::isfinite(width))
    throw validation_error("kernel width must be positive");
  profile_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) profile_[i] = (*this)(grid[i]);
  transform_ = fourier_radial(grid, profile_, momenta);
}

double InteractionKernel::operator()(double r) const {
  return amplitude_ * std::exp(-r * r / (2.0 * width_ * width_));
}

double InteractionKernel::analytic_transform(double rho) const {
  const double s2 = width_ * width_;
  return amplitude_ * std::pow(2.0 * std::numbers::pi * s2, 1.5) * std::exp(-0.5 * s2 * rho * rho);
}

InteractionKernel::Norms InteractionKernel::norms(const RadialGrid& grid, double s) const {
  std::vector<double> abs_w(grid.size()), w2(grid.size()), ww2(grid.size());
  double linf = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double a = std::abs(profile_[i]);
    abs_w[i] = a;
    w2[i] = a * a;
    ww2[i] = std::pow(1.0 + grid[i] * grid[i], s) * a * a;
    linf = std::max(linf, a);
  }
  linf = std::max(linf, std::abs(amplitude_));  // value at r = 0
  return {grid.integrate_r2(abs_w), std::sqrt(grid.integrate_r2(w2)), linf,
          std::sqrt(grid.integrate_r2(ww2))};
}

std::vector<double> InteractionKernel::convolve(const RadialGrid& grid,
                                                std::span<const double> f) const {
  if (f.size() != grid.size()) throw dimension_error("convolve: sample count mismatch");
  require_finite(f, "convolve");
  const double s2 = width_ * width_;
  const double pref = 2.0 * std::numbers::pi * amplitude_ * s2;
  const double h = grid.spacing();
  const std::size_t n = grid.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = grid[i];
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double s = grid[j];
      const double wj = j + 1 == n ? 0.5 * h : h;
      const double kern = std::exp(-(r - s) * (r - s) / (2.0 * s2)) -
                          std::exp(-(r + s) * (r + s) / (2.0 * s2));
      sum += wj * s * f[j] * kern;
    }
    out[i] = pref * sum / r;
  }
  return out;
}

std::string to_string(KernelRole role) {
  return role == KernelRole::photon_coupling ? "photon-coupling" : "pair-interaction";
}

}  // namespace cascade
