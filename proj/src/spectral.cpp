#include "cascade/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "cascade/error.hpp"
#include "cascade/io.hpp"

namespace cascade {

namespace {

// Panels within this many spacings of the pole use exact moments; the rest
// use Gauss-Legendre, whose error there is below (1/12)^10.
constexpr double kNearPanels = 6.0;

// 5-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 5> kGaussNodes = {
    0.046910077030668004, 0.23076534494715845, 0.5, 0.76923465505284155, 0.95308992296933200};
constexpr std::array<double, 5> kGaussWeights = {
    0.11846344252809454, 0.23931433524968324, 0.28444444444444444, 0.23931433524968324,
    0.11846344252809454};

// First node of the four-point stencil used on panel p of an n-interval grid.
std::size_t stencil_start(std::size_t p, std::size_t n) {
  if (p == 0) return 0;
  return std::min(p - 1, n - 3);
}

// Lagrange basis on nodes 0,1,2,3 evaluated at t.
std::array<double, 4> lagrange_basis(double t) {
  std::array<double, 4> l{};
  for (int m = 0; m < 4; ++m) {
    double v = 1.0;
    for (int j = 0; j < 4; ++j)
      if (j != m) v *= (t - j) / static_cast<double>(m - j);
    l[m] = v;
  }
  return l;
}

// Lagrange weights at every Gauss point, for a panel starting at stencil offset o.
struct GaussTable {
  std::array<std::array<std::array<double, 4>, 5>, 3> w{};
  GaussTable() {
    for (int o = 0; o < 3; ++o)
      for (int g = 0; g < 5; ++g) w[o][g] = lagrange_basis(o + kGaussNodes[g]);
  }
};

const GaussTable& gauss_table() {
  static const GaussTable table;
  return table;
}

// log(x + i e) with the branch continuous from above; e >= 0, so a negative
// real x with e = 0 gives ln|x| + i pi, i.e. the eps -> 0+ limit.
cplx log_upper(double x, double e) { return {0.5 * std::log(x * x + e * e), std::atan2(e, x)}; }

// Coefficients of the stencil cubic expanded about u = t - t0.
std::array<cplx, 4> taylor_coefficients(const cplx* y, double t0) {
  std::array<double, 4> x{};
  for (int m = 0; m < 4; ++m) x[m] = m - t0;
  // Divided differences (node spacing is exactly 1).
  std::array<cplx, 4> d{y[0], y[1], y[2], y[3]};
  for (int level = 1; level < 4; ++level)
    for (int m = 3; m >= level; --m) d[m] = (d[m] - d[m - 1]) / static_cast<double>(level);
  std::array<cplx, 4> poly{d[3], 0.0, 0.0, 0.0};
  for (int m = 2; m >= 0; --m) {
    std::array<cplx, 4> next{};
    for (int i = 0; i < 4; ++i) {
      next[i] -= x[m] * poly[i];
      if (i > 0) next[i] += poly[i - 1];
    }
    next[0] += d[m];
    poly = next;
  }
  return poly;
}

// \int_{tA}^{tB} u^m / (u + i e) du for m = 0..3.
std::array<cplx, 4> singular_moments(double tA, double tB, double e) {
  const cplx delta{0.0, e};
  const cplx i0 = log_upper(tB, e) - log_upper(tA, e);
  const double d1 = tB - tA;
  const double d2 = 0.5 * (tB * tB - tA * tA);
  const double d3 = (tB * tB * tB - tA * tA * tA) / 3.0;
  return {i0, d1 - delta * i0, d2 - delta * d1 + delta * delta * i0,
          d3 - delta * d2 + delta * delta * d1 - delta * delta * delta * i0};
}

// \int_0^{rho_max} (a(rho) - c) / (rho - lambda + i eps) d rho, with `c` the
// subtracted constant. In units of the grid spacing the integrand becomes
// (a - c)/(t - t_l + i e) with e = eps/h, so no Jacobian appears.
cplx remainder_integral(const SpectralDensity& a, double lambda, double eps, cplx c) {
  const auto& grid = a.grid();
  const auto vals = a.values();
  const std::size_t n = grid.intervals();
  const double h = grid.spacing();
  const double tl = lambda / h;
  const double e = eps / h;
  const auto& table = gauss_table();

  cplx sum{0.0, 0.0};
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t s0 = stencil_start(p, n);
    const double tA = static_cast<double>(p) - tl;
    const double tB = tA + 1.0;
    const bool near = tB > -kNearPanels && tA < kNearPanels;
    if (!near) {
      const auto& w = table.w[p - s0];
      cplx panel{0.0, 0.0};
      for (int g = 0; g < 5; ++g) {
        cplx q = 0.0;
        for (int m = 0; m < 4; ++m) q += w[g][m] * vals[s0 + m];
        panel += kGaussWeights[g] * (q - c) / cplx(tA + kGaussNodes[g], e);
      }
      sum += panel;
      continue;
    }
    auto coef = taylor_coefficients(&vals[s0], tl - static_cast<double>(s0));
    coef[0] -= c;
    if (e == 0.0 && (tA == 0.0 || tB == 0.0)) {
      // The pole sits on a node of this panel; the constant term is the
      // node value minus c, which must vanish for a finite integral.
      const cplx node = vals[tA == 0.0 ? p : p + 1] - c;
      if (std::abs(node) > 0.0)
        throw numerical_error("cauchy", "log-divergent endpoint at rho = " +
                                            io::format_double(lambda));
      for (int m = 1; m < 4; ++m) {
        const double pa = std::pow(tA, m), pb = std::pow(tB, m);
        sum += coef[m] * ((pb - pa) / static_cast<double>(m));
      }
      continue;
    }
    const auto mom = singular_moments(tA, tB, e);
    for (int m = 0; m < 4; ++m) sum += coef[m] * mom[m];
  }
  return sum;
}

void check_grid(const SpectralDensity& a) {
  if (a.grid().intervals() < 3) throw dimension_error("spectral density: grid too small");
}

}  // namespace

SpectralDensity::SpectralDensity(MomentumGrid grid, std::vector<cplx> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw dimension_error("spectral density: grid mismatch");
  check_grid(*this);
}

cplx SpectralDensity::at(double rho) const {
  const std::size_t n = grid_.intervals();
  const double t = rho / grid_.spacing();
  const double pf = std::clamp(std::floor(t), 0.0, static_cast<double>(n - 1));
  const auto p = static_cast<std::size_t>(pf);
  const std::size_t s0 = stencil_start(p, n);
  const auto l = lagrange_basis(t - static_cast<double>(s0));
  cplx v = 0.0;
  for (int m = 0; m < 4; ++m) v += l[m] * values_[s0 + m];
  return v;
}

cplx SpectralDensity::integral() const {
  cplx sum = 0.5 * (values_.front() + values_.back());
  for (std::size_t i = 1; i + 1 < values_.size(); ++i) sum += values_[i];
  return grid_.spacing() * sum;
}

SpectralDensity spectral_density(std::span<const double> fhat, std::span<const double> ghat,
                                 const MomentumGrid& grid) {
  if (fhat.size() != grid.size() || ghat.size() != grid.size())
    throw dimension_error("spectral_density: transforms not on the same momentum grid");
  const double pref = 4.0 * std::numbers::pi / std::pow(2.0 * std::numbers::pi, 3);
  std::vector<cplx> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    vals[i] = pref * grid[i] * grid[i] * fhat[i] * ghat[i];
  return SpectralDensity(grid, std::move(vals));
}

namespace {

void require_interior(const SpectralDensity& a, double lambda, const char* who) {
  if (!(lambda > 0.0 && lambda < a.grid().rho_max()))
    throw numerical_error("momentum-range", std::string(who) + ": lambda = " +
                                                io::format_double(lambda) +
                                                " is not inside the momentum grid");
}

cplx singular_part(const SpectralDensity& a, double lambda, double eps) {
  const cplx al = a.at(lambda);
  const double rmax = a.grid().rho_max();
  const cplx logs = log_upper(rmax - lambda, eps) - log_upper(-lambda, eps);
  return al * logs + remainder_integral(a, lambda, eps, al);
}

}  // namespace

cplx cauchy_transform(const SpectralDensity& a, double lambda, double epsilon) {
  require_interior(a, lambda, "cauchy_transform");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw validation_error("cauchy_transform: epsilon must be positive");
  return singular_part(a, lambda, epsilon);
}

cplx cauchy_transform_limit(const SpectralDensity& a, double lambda) {
  require_interior(a, lambda, "cauchy_transform_limit");
  return singular_part(a, lambda, 0.0);
}

cplx cauchy_transform_shifted(const SpectralDensity& a, double lambda, double epsilon) {
  if (lambda > 0.0)
    throw validation_error("cauchy_transform_shifted: pole must lie at or below rho = 0");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw validation_error("cauchy_transform_shifted: epsilon must be non-negative");
  if (-lambda >= a.grid().rho_max())
    throw numerical_error("momentum-range", "cauchy_transform_shifted: |lambda| beyond grid");
  return remainder_integral(a, lambda, epsilon, 0.0);
}

cplx resolvent_pairing(const SpectralDensity& a, double lambda, double epsilon) {
  if (std::abs(lambda) >= a.grid().rho_max())
    throw numerical_error("momentum-range", "resolvent pairing: |dE| = " +
                                                io::format_double(std::abs(lambda)) +
                                                " exceeds rho_max");
  if (lambda > 0.0)
    return epsilon == 0.0 ? cauchy_transform_limit(a, lambda) : cauchy_transform(a, lambda, epsilon);
  return cauchy_transform_shifted(a, lambda, epsilon);
}

double plemelj_constant(const SpectralDensity& a, double lambda) {
  require_interior(a, lambda, "plemelj_constant");
  const auto v = a.values();
  const double h = a.grid().spacing();
  double lip = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) lip = std::max(lip, std::abs(v[i] - v[i - 1]) / h);
  const double rmax = a.grid().rho_max();
  const double R = std::max(lambda, rmax - lambda);
  const double log10 = std::log(10.0);
  // For eps <= 0.1: log(1 + R^2/eps^2) <= 2 log(1/eps) (1 + max(0, log R)/log 10) + log 2.
  const double lip_part = lip * (2.0 * (1.0 + std::max(0.0, std::log(R)) / log10) + std::log(2.0) / log10);
  const double edge = std::abs(a.at(lambda)) * (1.0 / lambda + 1.0 / (rmax - lambda)) / log10;
  return lip_part + edge;
}

LapProbeReport lap_uniformity_probe(const SpectralDensity& a, double lambda_lo, double lambda_hi,
                                    std::span<const double> eps_list, double growth_factor,
                                    std::size_t n_lambda, double holder_alpha) {
  LapProbeReport report;
  report.holder_alpha = holder_alpha;
  if (eps_list.empty()) return report;
  require_interior(a, lambda_lo, "lap_uniformity_probe");
  require_interior(a, lambda_hi, "lap_uniformity_probe");
  if (!(lambda_hi > lambda_lo) || n_lambda < 2)
    throw validation_error("lap_uniformity_probe: empty lambda window");

  std::vector<double> lambdas(n_lambda);
  for (std::size_t i = 0; i < n_lambda; ++i)
    lambdas[i] = lambda_lo + (lambda_hi - lambda_lo) * static_cast<double>(i) /
                                 static_cast<double>(n_lambda - 1);

  for (double eps : eps_list) {
    LapProbeRow row{eps, 0.0, 0.0};
    for (double l : lambdas) {
      const cplx c = cauchy_transform(a, l, eps);
      row.sup_abs = std::max(row.sup_abs, std::abs(c));
      row.sup_abs_real = std::max(row.sup_abs_real, std::abs(c.real()));
    }
    report.rows.push_back(row);
  }

  std::vector<cplx> av(n_lambda);
  for (std::size_t i = 0; i < n_lambda; ++i) av[i] = a.at(lambdas[i]);
  for (std::size_t i = 0; i < n_lambda; ++i)
    for (std::size_t j = i + 1; j < n_lambda; ++j)
      report.holder_quotient =
          std::max(report.holder_quotient,
                   std::abs(av[i] - av[j]) / std::pow(lambdas[j] - lambdas[i], holder_alpha));

  // Order rows by decreasing eps to judge growth as eps shrinks.
  std::vector<LapProbeRow> sorted = report.rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const LapProbeRow& x, const LapProbeRow& y) { return x.epsilon > y.epsilon; });
  const double first = sorted.front().sup_abs;
  report.growth_ratio = first > 0.0 ? sorted.back().sup_abs / first : 0.0;
  bool monotone = sorted.size() > 1;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    monotone = monotone && sorted[i].sup_abs > sorted[i - 1].sup_abs;
  report.flagged = monotone && report.growth_ratio > growth_factor;
  return report;
}

}  // namespace cascade
