#include "cascade/trap_spectrum.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cascade/error.hpp"
#include "cascade/io.hpp"

namespace cascade {

RadialGrid::RadialGrid(double r_max, std::size_t n_points) : r_max_(r_max) {
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw validation_error("radial grid: r_max must be positive and finite");
  if (n_points < 16) throw validation_error("radial grid: need at least 16 points");
  h_ = r_max / static_cast<double>(n_points);
  nodes_.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) nodes_[i] = h_ * static_cast<double>(i + 1);
  nodes_.back() = r_max;
}

double RadialGrid::integrate_r2(std::span<const double> f) const {
  if (f.size() != nodes_.size()) throw dimension_error("integrate_r2: sample count mismatch");
  double sum = 0.0;
  const std::size_t n = nodes_.size();
  for (std::size_t i = 0; i + 1 < n; ++i) sum += f[i] * nodes_[i] * nodes_[i];
  sum += 0.5 * f[n - 1] * nodes_[n - 1] * nodes_[n - 1];
  return 4.0 * std::numbers::pi * h_ * sum;
}

Potential Potential::harmonic(double omega) {
  if (!(omega > 0.0)) throw validation_error("harmonic trap: omega must be positive");
  return Potential(PotentialKind::harmonic, omega, 0.0);
}

Potential Potential::anharmonic(double beta, double omega) {
  if (!(omega > 0.0)) throw validation_error("anharmonic trap: omega must be positive");
  if (!(beta >= 0.0)) throw validation_error("anharmonic trap: beta must be non-negative");
  return Potential(PotentialKind::anharmonic, omega, beta);
}

Potential Potential::tabulated(std::vector<double> radii, std::vector<double> values) {
  if (radii.size() != values.size() || radii.size() < 2)
    throw validation_error("tabulated trap: need matching radii/values with >= 2 entries");
  if (!std::is_sorted(radii.begin(), radii.end()) ||
      std::adjacent_find(radii.begin(), radii.end()) != radii.end())
    throw validation_error("tabulated trap: radii must be strictly increasing");
  Potential p(PotentialKind::tabulated, 0.0, 0.0);
  p.table_r_ = std::move(radii);
  p.table_v_ = std::move(values);
  return p;
}

double Potential::operator()(double r) const {
  if (kind_ != PotentialKind::tabulated) {
    const double r2 = r * r;
    return omega_ * omega_ * r2 + beta_ * r2 * r2;
  }
  if (r <= table_r_.front()) return table_v_.front();
  if (r >= table_r_.back()) return table_v_.back();
  const auto it = std::upper_bound(table_r_.begin(), table_r_.end(), r);
  const std::size_t i = static_cast<std::size_t>(it - table_r_.begin()) - 1;
  const double t = (r - table_r_[i]) / (table_r_[i + 1] - table_r_[i]);
  return (1.0 - t) * table_v_[i] + t * table_v_[i + 1];
}

std::vector<double> Potential::sample(const RadialGrid& grid) const {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = (*this)(grid[i]);
  return v;
}

Potential::Coercivity Potential::coercivity(const RadialGrid& grid) const {
  const auto v = sample(grid);
  const double vmin = *std::min_element(v.begin(), v.end());
  const double c0 = std::max(0.0, -vmin);
  // Smallest slope c with V(r) >= c r - C0 at every node.
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) c = std::min(c, (v[i] + c0) / grid[i]);
  return {c, c0};
}

std::string Potential::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case PotentialKind::harmonic:
      os << "harmonic(omega=" << io::format_double(omega_) << ")";
      break;
    case PotentialKind::anharmonic:
      os << "anharmonic(omega=" << io::format_double(omega_)
         << ",beta=" << io::format_double(beta_) << ")";
      break;
    case PotentialKind::tabulated:
      os << "tabulated(" << table_r_.size() << " samples)";
      break;
  }
  return os.str();
}

namespace {

struct TridiagonalSpectrum {
  std::vector<double> values;
  std::vector<double> vectors;  // column-major, m x K
};

// Lowest K eigenpairs of -d^2/dr^2 + V with Dirichlet ends, second-order
// differences on the m = n - 1 interior unknowns.
TridiagonalSpectrum lowest_eigenpairs(const Potential& potential, const RadialGrid& grid,
                                      std::size_t K, bool want_vectors) {
  const std::size_t m = grid.size() - 1;
  const double h = grid.spacing();
  const double inv_h2 = 1.0 / (h * h);
  std::vector<double> diag(m), off(m > 1 ? m - 1 : 1, -inv_h2);
  for (std::size_t i = 0; i < m; ++i) diag[i] = 2.0 * inv_h2 + potential(grid[i]);

  TridiagonalSpectrum out;
  out.values.assign(m, 0.0);
  if (want_vectors) out.vectors.assign(m * K, 0.0);
  std::vector<lapack_int> support(2 * K);
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dstevr(
      LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'I', static_cast<lapack_int>(m), diag.data(),
      off.data(), 0.0, 0.0, 1, static_cast<lapack_int>(K), 0.0, &found, out.values.data(),
      want_vectors ? out.vectors.data() : nullptr, static_cast<lapack_int>(m), support.data());
  if (info != 0 || found != static_cast<lapack_int>(K))
    throw numerical_error("eigensolver", "dstevr failed (info=" + std::to_string(info) + ")");
  out.values.resize(K);
  return out;
}

}  // namespace

EigenBasis solve_radial_eigenpairs(const Potential& potential, const RadialGrid& grid,
                                   std::size_t K, const EigenSolveOptions& opts) {
  const std::size_t n = grid.size();
  if (K == 0 || 4 * K >= n)
    throw dimension_error("solve_radial_eigenpairs: need 0 < K < n_points/4 (K=" +
                          std::to_string(K) + ", n_points=" + std::to_string(n) + ")");

  auto fine = lowest_eigenpairs(potential, grid, K, true);
  const std::size_t m = n - 1;
  const double h = grid.spacing();

  std::vector<double> energies = fine.values;
  if (opts.richardson) {
    const RadialGrid coarse(grid.r_max(), n / 2);
    const auto c = lowest_eigenpairs(potential, coarse, K, false);
    const double hf2 = h * h;
    const double hc2 = coarse.spacing() * coarse.spacing();
    for (std::size_t k = 0; k < K; ++k)
      energies[k] = (hc2 * fine.values[k] - hf2 * c.values[k]) / (hc2 - hf2);
  }
  for (std::size_t k = 0; k + 1 < K; ++k) {
    if (!(energies[k + 1] - energies[k] > 1e-12 * std::max(1.0, std::abs(energies[k + 1]))))
      throw numerical_error("degenerate-spectrum",
                            "eigenvalues " + std::to_string(k) + " and " + std::to_string(k + 1) +
                                " are not separated");
  }

  EigenBasis basis{std::move(energies), {}, grid};
  basis.modes.assign(K, std::vector<double>(n, 0.0));
  const double to_chi = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  const std::size_t outer = std::max<std::size_t>(1, n / 20);

  for (std::size_t k = 0; k < K; ++k) {
    std::span<const double> psi(fine.vectors.data() + k * m, m);
    double peak = 0.0;
    for (double x : psi) peak = std::max(peak, std::abs(x));
    double edge = 0.0;
    for (std::size_t i = m - std::min(m, outer); i < m; ++i) edge = std::max(edge, std::abs(psi[i]));
    if (edge > opts.decay_tol * peak)
      throw numerical_error("domain-truncation",
                            "mode " + std::to_string(k) + " has not decayed at r_max (edge/peak=" +
                                io::format_double(edge / peak) + ")");

    // Discrete normalisation h sum psi^2 = 1, so 4 pi \int chi^2 r^2 dr = 1 on the grid.
    double norm2 = 0.0;
    for (double x : psi) norm2 += x * x;
    double scale = 1.0 / std::sqrt(h * norm2);
    const auto first = std::find_if(psi.begin(), psi.end(),
                                    [&](double x) { return std::abs(x) > 1e-12 * peak; });
    if (first != psi.end() && *first < 0.0) scale = -scale;

    auto& chi = basis.modes[k];
    for (std::size_t i = 0; i < m; ++i) chi[i] = scale * psi[i] / grid[i] * to_chi;
    chi[n - 1] = 0.0;
  }
  return basis;
}

double energy_mismatch(std::span<const double> energies, const Quadruple& q) {
  return (energies[q[0]] - energies[q[1]]) - (energies[q[2]] - energies[q[3]]);
}

bool is_trivially_resonant(const Quadruple& q) {
  return (q[0] == q[2] && q[1] == q[3]) || (q[0] == q[1] && q[2] == q[3]);
}

ResonanceReport check_gap_independence(const EigenBasis& basis, double gap_tol) {
  ResonanceReport report{{}, std::numeric_limits<double>::infinity()};
  const std::size_t K = basis.size();
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t kp = 0; kp < K; ++kp)
      for (std::size_t j = 0; j < K; ++j)
        for (std::size_t jp = 0; jp < K; ++jp) {
          const Quadruple q{k, kp, j, jp};
          if (is_trivially_resonant(q)) continue;
          const double gap = std::abs(energy_mismatch(basis.energies, q));
          report.min_gap = std::min(report.min_gap, gap);
          if (gap < gap_tol) report.collisions.push_back(q);
        }
  return report;
}

std::vector<double> mode_product(const EigenBasis& basis, std::size_t k, std::size_t kp) {
  if (k >= basis.size() || kp >= basis.size())
    throw dimension_error("mode_product: index out of range");
  const auto& a = basis.modes[k];
  const auto& b = basis.modes[kp];
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

void write_basis_csv(std::ostream& out, const EigenBasis& basis, const Potential& potential,
                     std::span<const std::string> header_lines) {
  io::write_comments(out, header_lines);
  std::string energies = "energies=";
  for (std::size_t k = 0; k < basis.size(); ++k) {
    if (k) energies += ' ';
    energies += io::format_double(basis.energies[k]);
  }
  const std::string line[] = {energies};
  io::write_comments(out, line);

  std::vector<std::string> cells{"r", "V"};
  for (std::size_t k = 0; k < basis.size(); ++k) cells.push_back("chi_" + std::to_string(k));
  io::write_row(out, cells);
  const auto& grid = basis.grid;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    cells.clear();
    cells.push_back(io::format_double(grid[i]));
    cells.push_back(io::format_double(potential(grid[i])));
    for (std::size_t k = 0; k < basis.size(); ++k)
      cells.push_back(io::format_double(basis.modes[k][i]));
    io::write_row(out, cells);
  }
}

}  // namespace cascade
