#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace cascade {

/// Uniform radial grid r_i = (i+1) h, i = 0..n-1, h = r_max / n.
/// The last node sits on r_max, where the Dirichlet condition is imposed.
class RadialGrid {
 public:
  RadialGrid(double r_max, std::size_t n_points);

  double r_max() const noexcept { return r_max_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double spacing() const noexcept { return h_; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  double operator[](std::size_t i) const { return nodes_[i]; }

  /// 4 pi \int_0^{r_max} f(r) r^2 dr by the trapezoid rule; the implicit
  /// node at r = 0 carries zero weight because of the r^2 factor.
  double integrate_r2(std::span<const double> f) const;

 private:
  double r_max_;
  double h_;
  std::vector<double> nodes_;
};

enum class PotentialKind { harmonic, anharmonic, tabulated };

/// Spherically symmetric trap V(r) = omega^2 r^2 + beta r^4, or a tabulated
/// profile interpolated linearly onto whatever grid it is sampled on.
class Potential {
 public:
  static Potential harmonic(double omega = 1.0);
  static Potential anharmonic(double beta, double omega = 1.0);
  static Potential tabulated(std::vector<double> radii, std::vector<double> values);

  PotentialKind kind() const noexcept { return kind_; }
  double omega() const noexcept { return omega_; }
  double beta() const noexcept { return beta_; }

  double operator()(double r) const;
  std::vector<double> sample(const RadialGrid& grid) const;

  struct Coercivity {
    double c;   // slope in V(r) >= c r - C0
    double c0;  // offset C0 >= 0
  };
  /// Constants of the linear lower bound realised on the grid.
  Coercivity coercivity(const RadialGrid& grid) const;

  std::string describe() const;

 private:
  Potential(PotentialKind kind, double omega, double beta)
      : kind_(kind), omega_(omega), beta_(beta) {}

  PotentialKind kind_;
  double omega_ = 1.0;
  double beta_ = 0.0;
  std::vector<double> table_r_;
  std::vector<double> table_v_;
};

/// K lowest l = 0 eigenpairs of -Delta + V. Modes are the radial profiles
/// chi_k(r) sampled on the grid, normalised so 4 pi \int chi_j chi_k r^2 dr = delta_jk.
struct EigenBasis {
  std::vector<double> energies;
  std::vector<std::vector<double>> modes;
  RadialGrid grid;

  std::size_t size() const noexcept { return energies.size(); }
  std::span<const double> mode(std::size_t k) const { return modes.at(k); }
};

struct EigenSolveOptions {
  /// Largest admissible |psi| over the outer 5% of the grid, relative to max |psi|.
  double decay_tol = 1e-6;
  /// Combine the h and 2h spectra to cancel the O(h^2) eigenvalue error.
  bool richardson = true;
};

EigenBasis solve_radial_eigenpairs(const Potential& potential, const RadialGrid& grid,
                                   std::size_t K, const EigenSolveOptions& opts = {});

using Quadruple = std::array<std::size_t, 4>;

/// Energy mismatch (E_k - E_k') - (E_j - E_j') of an index quadruple.
double energy_mismatch(std::span<const double> energies, const Quadruple& q);

/// Quadruples whose mismatch vanishes identically: (k,k';k,k') and (k,k;j,j).
bool is_trivially_resonant(const Quadruple& q);

struct ResonanceReport {
  std::vector<Quadruple> collisions;
  /// Smallest |mismatch| among non-trivial quadruples; +inf if there are none.
  double min_gap;
};

ResonanceReport check_gap_independence(const EigenBasis& basis, double gap_tol = 1e-8);

/// Pointwise chi_k(r) chi_k'(r).
std::vector<double> mode_product(const EigenBasis& basis, std::size_t k, std::size_t kp);

/// CSV with columns r, V, chi_0..chi_{K-1}; comment lines carry the energies.
void write_basis_csv(std::ostream& out, const EigenBasis& basis, const Potential& potential,
                     std::span<const std::string> header_lines = {});

}  // namespace cascade
