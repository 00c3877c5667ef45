#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cascade/trap_spectrum.hpp"

namespace cascade {

/// Uniform momentum grid rho_i = i h, i = 0..n_intervals, covering [0, rho_max].
class MomentumGrid {
 public:
  MomentumGrid(double rho_max, std::size_t n_intervals);

  /// Default sizing for a set of energy gaps: rho_max = 4 max|dE| + 8.
  static MomentumGrid for_max_gap(double max_gap, std::size_t n_intervals = 4096);

  double rho_max() const noexcept { return rho_max_; }
  double spacing() const noexcept { return h_; }
  std::size_t intervals() const noexcept { return nodes_.size() - 1; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::span<const double> nodes() const noexcept { return nodes_; }
  double operator[](std::size_t i) const { return nodes_[i]; }

  bool operator==(const MomentumGrid& o) const noexcept {
    return rho_max_ == o.rho_max_ && nodes_.size() == o.nodes_.size();
  }

  /// Trapezoid rule over the grid.
  double integrate(std::span<const double> f) const;

 private:
  double rho_max_;
  double h_;
  std::vector<double> nodes_;
};

/// 4 pi h r_j^2 trapezoid weights of the radial grid.
std::vector<double> radial_weights(const RadialGrid& grid);

/// fhat(rho) = 4 pi \int f(r) sin(rho r)/(rho r) r^2 dr, evaluated by the
/// trapezoid rule on the radial grid. Forward convention exp(-i x.xi).
std::vector<double> fourier_radial(const RadialGrid& grid, std::span<const double> f,
                                   const MomentumGrid& momenta);

/// Same transform at one momentum.
double fourier_radial_at(const RadialGrid& grid, std::span<const double> f, double rho);

/// Batched transform; the OpenMP kernel is used unless `parallel` is false.
std::vector<std::vector<double>> fourier_radial_batch(
    const RadialGrid& grid, const std::vector<std::span<const double>>& functions,
    const MomentumGrid& momenta, bool parallel = true);

enum class KernelRole { photon_coupling, pair_interaction };

/// Gaussian two-body kernel A exp(-r^2 / (2 sigma^2)), sampled on the radial
/// grid with its radial transform cached on the momentum grid.
class InteractionKernel {
 public:
  InteractionKernel(KernelRole role, double amplitude, double width, const RadialGrid& grid,
                    const MomentumGrid& momenta);

  KernelRole role() const noexcept { return role_; }
  double amplitude() const noexcept { return amplitude_; }
  double width() const noexcept { return width_; }
  std::span<const double> profile() const noexcept { return profile_; }
  std::span<const double> transform() const noexcept { return transform_; }

  double operator()(double r) const;
  /// Closed form A (2 pi sigma^2)^{3/2} exp(-sigma^2 rho^2 / 2).
  double analytic_transform(double rho) const;

  struct Norms {
    double l1, l2, linf;
    double weighted_l2;  // (\int (1+r^2)^s |w|^2 d^3x)^{1/2}
  };
  Norms norms(const RadialGrid& grid, double s) const;

  /// Real-space 3D convolution (w * f)(r) of a radial f sampled on the grid;
  /// the angular integral is done in closed form.
  std::vector<double> convolve(const RadialGrid& grid, std::span<const double> f) const;

 private:
  KernelRole role_;
  double amplitude_;
  double width_;
  std::vector<double> profile_;
  std::vector<double> transform_;
};

std::string to_string(KernelRole role);

}  // namespace cascade
