#include "cascade/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "cascade/convergence.hpp"
#include "cascade/dynamics.hpp"
#include "cascade/error.hpp"
#include "cascade/io.hpp"
#include "cascade/spectral.hpp"

namespace cascade {

using json = nlohmann::json;

Command parse_command(const std::string& name) {
  if (name == "spectrum") return Command::spectrum;
  if (name == "coeffs") return Command::coeffs;
  if (name == "evolve") return Command::evolve;
  if (name == "converge") return Command::converge;
  if (name == "check") return Command::check;
  throw config_error("unknown command '" + name + "'");
}

std::string to_string(Command c) {
  switch (c) {
    case Command::spectrum: return "spectrum";
    case Command::coeffs: return "coeffs";
    case Command::evolve: return "evolve";
    case Command::converge: return "converge";
    default: return "check";
  }
}

Potential make_potential(const SimulationConfig& c) {
  if (c.trap.kind == "harmonic") return Potential::harmonic(c.trap.omega);
  return Potential::anharmonic(c.trap.beta, c.trap.omega);
}

EigenBasis make_basis(const SimulationConfig& c, std::size_t K) {
  const RadialGrid grid(c.trap.r_max, static_cast<std::size_t>(c.trap.n_points));
  EigenSolveOptions opts;
  opts.decay_tol = c.trap.decay_tol;
  return solve_radial_eigenpairs(make_potential(c), grid, K, opts);
}

MomentumGrid make_momenta(const SimulationConfig& c, const EigenBasis& basis, std::size_t refine) {
  const double max_gap = basis.energies.back() - basis.energies.front();
  const auto n = static_cast<std::size_t>(c.momentum.n_rho) * refine;
  if (c.momentum.rho_max == 0.0) return MomentumGrid::for_max_gap(max_gap, n);
  if (c.momentum.rho_max < 4.0 * max_gap)
    throw validation_error("momentum.rho_max must be at least 4 max|dE| = " +
                           io::format_double(4.0 * max_gap));
  return MomentumGrid(c.momentum.rho_max, n);
}

Model build_model(const SimulationConfig& c, std::size_t K, std::size_t refine, bool parallel) {
  auto basis = make_basis(c, K);
  auto momenta = make_momenta(c, basis, refine);
  const auto& grid = basis.grid;
  InteractionKernel w(KernelRole::photon_coupling, c.kernels.w_amplitude, c.kernels.w_width, grid,
                      momenta);
  InteractionKernel v(KernelRole::pair_interaction, c.kernels.v_amplitude, c.kernels.v_width, grid,
                      momenta);
  ResonanceModel res(basis, w, v, momenta, parallel);
  return Model{make_potential(c), grid, std::move(basis), momenta, std::move(w), std::move(v),
               std::move(res)};
}

namespace {

const char* const kModules[] = {"trap-spectrum", "resonance-coeffs", "cascade-dynamics",
                                "convergence-lab", "sim-cli"};

json conventions_json(const SimulationConfig& c) {
  return {{"fourier", "forward exp(-i x.xi), inverse (2 pi)^-3"},
          {"fgr_pi", c.conventions.fgr_pi},
          {"epsilon_policy", c.conventions.epsilon_policy},
          {"direct_terms", c.conventions.direct_terms},
          {"tensor_filter", c.conventions.tensor_filter}};
}

json modules_json() {
  json m;
  for (const char* name : kModules) m[name] = std::string(io::kVersion);
  return m;
}

std::string provenance(const SimulationConfig& c, Command cmd) {
  json p;
  p["config_sha256"] = config_hash(c);
  p["command"] = to_string(cmd);
  p["modules"] = modules_json();
  p["conventions"] = conventions_json(c);
  return p.dump();
}

std::vector<std::string> csv_header(const SimulationConfig& c, Command cmd) {
  return {"config_sha256=" + config_hash(c),
          "command=" + to_string(cmd),
          "version=" + std::string(io::kVersion),
          "conventions=fgr_pi:" + std::string(c.conventions.fgr_pi ? "true" : "false") +
              ";epsilon_policy:" + c.conventions.epsilon_policy +
              ";direct_terms:" + (c.conventions.direct_terms ? "true" : "false") +
              ";tensor_filter:" + c.conventions.tensor_filter};
}

json config_echo(const SimulationConfig& c) {
  boost::property_tree::ptree tree;
  std::istringstream in(emit_config(c));
  boost::property_tree::read_ini(in, tree);
  json out = json::object();
  for (const auto& [section, sub] : tree)
    for (const auto& [key, value] : sub) out[section][key] = value.data();
  return out;
}

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw validation_error("cannot create output directory '" + dir_.string() + "'");
  }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!out) throw validation_error("cannot write '" + (dir_ / name).string() + "'");
    out << content;
    files_.push_back({{"name", name}, {"sha256", io::sha256_hex(content)}});
  }

  const json& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  json files_ = json::array();
};

double orthonormality_error(const EigenBasis& basis) {
  double worst = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j)
    for (std::size_t k = j; k < basis.size(); ++k) {
      const double ip = basis.grid.integrate_r2(mode_product(basis, j, k));
      worst = std::max(worst, std::abs(ip - (j == k ? 1.0 : 0.0)));
    }
  return worst;
}

bool sign_convention_holds(const EigenBasis& basis) {
  for (const auto& chi : basis.modes) {
    double peak = 0.0;
    for (double x : chi) peak = std::max(peak, std::abs(x));
    const auto first =
        std::find_if(chi.begin(), chi.end(), [&](double x) { return std::abs(x) > 1e-12 * peak; });
    if (first == chi.end() || *first < 0.0) return false;
  }
  return true;
}

std::string resonance_json(const SimulationConfig& c, const EigenBasis& basis,
                           const Potential& potential, Command cmd) {
  const auto report = check_gap_independence(basis, c.trap.gap_tol);
  const auto co = potential.coercivity(basis.grid);
  json doc;
  doc["K"] = basis.size();
  doc["energies"] = basis.energies;
  doc["gap_tol"] = c.trap.gap_tol;
  json coll = json::array();
  for (const auto& q : report.collisions) coll.push_back(q);
  doc["collisions"] = coll;
  doc["min_gap"] = std::isfinite(report.min_gap) ? json(report.min_gap) : json("inf");
  doc["potential"] = {{"description", potential.describe()}, {"c", co.c}, {"C0", co.c0}};
  doc["orthonormality_error"] = orthonormality_error(basis);
  doc["provenance"] = json::parse(provenance(c, cmd));
  return doc.dump(2) + "\n";
}

CoefficientSet coefficients_for_dynamics(const SimulationConfig& c, std::vector<double>& energies) {
  const auto K = static_cast<std::size_t>(c.trap.K);
  if (const auto rate = synthetic_rate(c.dynamics.coefficients)) {
    auto set = synthetic_logistic_coefficients(K, *rate);
    energies = set.energies;
    return set;
  }
  const auto model = build_model(c, K);
  energies = model.basis.energies;
  const auto opts = coefficient_options(c);
  if (c.dynamics.flow == "prelimit")
    return model.resonance.assemble_prelimit_tensor(c.dynamics.eta, opts);
  return model.resonance.assemble_limit_matrix(opts);
}

// ---------------------------------------------------------------------------
// Invariant suite

struct Suite {
  std::vector<CheckResult> results;

  void add(const std::string& module, const std::string& name, bool passed, double measured,
           double tolerance, const std::string& note = "") {
    results.push_back({module, name, passed, false, measured, tolerance, note});
  }
  void leq(const std::string& module, const std::string& name, double measured, double tolerance,
           const std::string& note = "") {
    add(module, name, std::isfinite(measured) && measured <= tolerance, measured, tolerance, note);
  }
  void lt(const std::string& module, const std::string& name, double measured, double tolerance,
          const std::string& note = "") {
    add(module, name, std::isfinite(measured) && measured < tolerance, measured, tolerance, note);
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

void check_trap(Suite& s, const SimulationConfig& c, const Model& m) {
  const std::string mod = "trap-spectrum";
  s.lt(mod, "orthonormality", orthonormality_error(m.basis), 1e-8);

  SimulationConfig fine = c;
  fine.trap.n_points *= 2;
  const auto basis2 = make_basis(fine, m.basis.size());
  double conv = 0.0;
  for (std::size_t k = 0; k < m.basis.size(); ++k)
    conv = std::max(conv, rel(m.basis.energies[k], basis2.energies[k]));
  s.lt(mod, "spectral_convergence", conv, 1e-6, "|E_k(n) - E_k(2n)| / E_k(2n)");

  s.add(mod, "sign_convention", sign_convention_holds(m.basis), 0.0, 0.0,
        "first significant sample of each mode positive");

  bool increasing = true;
  for (std::size_t k = 1; k < m.basis.size(); ++k)
    increasing = increasing && m.basis.energies[k] > m.basis.energies[k - 1];
  s.add(mod, "energies_increasing", increasing, 0.0, 0.0);

  const auto co = m.potential.coercivity(m.grid);
  s.add(mod, "coercivity", co.c > 0.0 && std::isfinite(co.c0), co.c, 0.0,
        "V(r) >= c r - C0 with C0 = " + io::format_double(co.c0));

  const std::size_t Kh = std::min<std::size_t>(6, m.basis.size());
  const auto harmonic =
      solve_radial_eigenpairs(Potential::harmonic(1.0), RadialGrid(12.0, 2000), Kh);
  double herr = 0.0;
  for (std::size_t k = 0; k < Kh; ++k)
    herr = std::max(herr, rel(harmonic.energies[k], 4.0 * static_cast<double>(k) + 3.0));
  s.lt(mod, "harmonic_oracle", herr, 1e-6, "omega = 1, r_max = 12, n = 2000: E_k = 4k + 3");

  const auto gaps = check_gap_independence(m.basis, c.trap.gap_tol);
  s.add(mod, "gap_independence", gaps.collisions.empty(),
        static_cast<double>(gaps.collisions.size()), 0.0,
        "min off-diagonal gap " + io::format_double(gaps.min_gap));
}

void check_coefficients(Suite& s, const SimulationConfig& c, const Model& m,
                        const CoefficientSet& set) {
  const std::string mod = "resonance-coeffs";
  const std::size_t K = set.K;
  const auto opts = coefficient_options(c);
  const auto& model = m.resonance;

  bool fgr_ok = true;
  double anti = 0.0, diag_re = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    fgr_ok = fgr_ok && set.fgr(k, k) == 0.0;
    diag_re = std::max(diag_re, std::abs(set.limit(k, k).real()));
    for (std::size_t kp = 0; kp < K; ++kp) {
      fgr_ok = fgr_ok && set.fgr(k, kp) == set.fgr(kp, k) && set.fgr(k, kp) >= 0.0;
      anti = std::max(anti, std::abs(set.limit(k, kp).real() + set.limit(kp, k).real()));
    }
  }
  s.add(mod, "fgr_symmetric_nonnegative_zero_diagonal", fgr_ok, 0.0, 0.0);
  s.add(mod, "re_M_antisymmetric", anti == 0.0, anti, 0.0);
  s.add(mod, "re_M_diagonal_zero", diag_re == 0.0, diag_re, 0.0);

  double im_max = 0.0;
  for (const auto& z : set.limit.data) im_max = std::max(im_max, std::abs(z.imag()));
  s.add(mod, "im_M_finite", std::isfinite(im_max), im_max, 0.0);

  bool har_sym = true;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t kp = 0; kp < K; ++kp)
      for (std::size_t j = 0; j < K; ++j)
        for (std::size_t jp = 0; jp < K; ++jp) {
          const double h = model.lambda_hartree(k, kp, j, jp);
          har_sym = har_sym && h == model.lambda_hartree(kp, k, j, jp) &&
                    h == model.lambda_hartree(k, kp, jp, j);
        }
  s.add(mod, "hartree_symmetry", har_sym, 0.0, 0.0, "k <-> k' and j <-> j'");

  // Independent recomputation: serial transforms, entries evaluated one by one.
  const auto serial = build_model(c, K, 1, false);
  double recompute = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t kp = 0; kp < K; ++kp) {
      const double g = serial.resonance.gamma_fgr(k, kp, opts.fgr_pi);
      const double dir = k > kp ? 1.0 : (kp > k ? -1.0 : 0.0);
      double im = -(serial.resonance.lambda_hartree(k, kp, k, kp) -
                    serial.resonance.lambda_lamb_shift(k, kp, k, kp));
      if (opts.direct_terms && k != kp)
        im -= serial.resonance.lambda_hartree(k, k, kp, kp) -
              serial.resonance.lambda_lamb_shift(k, k, kp, kp);
      recompute = std::max(recompute, std::abs(cplx(-g * dir, im) - set.limit(k, kp)));
    }
  s.lt(mod, "independent_recomputation", recompute, 1e-10);

  double dual = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t kp = 0; kp < K; ++kp) {
      if (k == kp) continue;
      const double d = model.gamma_fgr(k, kp, opts.fgr_pi);
      if (!(d > 0.0)) continue;
      const double r = model.gamma_fgr_resolvent(k, kp, opts.fgr_pi, opts.resolvent_eps);
      dual = std::max(dual, std::abs(d - r) / std::max(d, 1e-12));
    }
  s.lt(mod, "dual_route_fgr", dual, 1e-6);

  double planch = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t kp = k; kp < K; ++kp) {
      const auto g = m.w.convolve(m.grid, mode_product(m.basis, k, kp));
      std::vector<double> g2(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) g2[i] = g[i] * g[i];
      const double direct = m.grid.integrate_r2(g2);
      const double spectral = model.density(k, kp, k, kp).integral().real();
      planch = std::max(planch, rel(spectral, direct));
    }
  s.lt(mod, "plancherel", planch, 1e-6, "int a = <g, g>, g = w * (chi_k chi_k')");

  std::vector<double> eps_list;
  for (int i = 0; i <= 8; ++i) eps_list.push_back(std::pow(10.0, -0.5 * i));
  const auto uni = epsilon_uniformity(model, eps_list, opts);
  s.lt(mod, "epsilon_uniformity", uni.worst_growth, 2.0,
       "sup |M^eps| growth between the two smallest eps, eps in [1e-4, 1]");

  const auto refined = build_model(c, K, 2);
  const auto set2 = refined.resonance.assemble_limit_matrix(opts);
  double rows = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double a = 0.0, b = 0.0;
    for (std::size_t kp = 0; kp < K; ++kp) {
      a += std::abs(set.limit(k, kp));
      b += std::abs(set2.limit(k, kp));
    }
    rows = std::max(rows, rel(a, b));
  }
  s.lt(mod, "row_sums_stable", rows, 1e-6, "sum_k' |M_kk'| under momentum-grid doubling");

  if (K >= 2) {
    const auto a = model.density(0, 1, 0, 1);
    const double lo = std::max(0.5 * (m.basis.energies[1] - m.basis.energies[0]), 4.0 * m.momenta.spacing());
    const double hi = m.basis.energies.back() - m.basis.energies.front();
    const double eps[] = {1.0, 1e-1, 1e-2, 1e-3, 1e-4};
    const auto lap = lap_uniformity_probe(a, lo, std::max(hi, 2.0 * lo), eps);
    s.add(mod, "lap_probe", !lap.flagged, lap.growth_ratio, 10.0,
          "Hoelder quotient " + io::format_double(lap.holder_quotient));

    const double gap = m.basis.energies[1] - m.basis.energies[0];
    const double C = plemelj_constant(a, gap);
    double worst = 0.0;
    for (double e : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const double err = std::abs(cauchy_transform(a, gap, e).imag() + std::numbers::pi * a.at(gap).real());
      worst = std::max(worst, err / (e * std::log(1.0 / e)));
    }
    s.leq(mod, "sokhotski_plemelj", worst, C, "max err / (eps log(1/eps)) against the bound constant");
  }

  const auto kn = m.w.norms(m.grid, c.kernels.s);
  s.add(mod, "kernel_norms_finite",
        std::isfinite(kn.l1) && std::isfinite(kn.l2) && std::isfinite(kn.linf) &&
            std::isfinite(kn.weighted_l2),
        kn.weighted_l2, 0.0, "weighted L2 norm with s = " + io::format_double(c.kernels.s));
}

void check_dynamics(Suite& s, const SimulationConfig& c, const Model& m,
                    const CoefficientSet& set) {
  const std::string mod = "cascade-dynamics";
  const auto K = set.K;
  const auto sopts = solver_options(c);
  const auto F0 = initial_state(c.dynamics.initial, K, c.dynamics.normalize);
  const auto times = sample_times(c.dynamics.T_end, static_cast<std::size_t>(c.dynamics.samples));
  const auto traj = integrate_limit(set, F0, times, sopts);
  const auto d = diagnostics(traj, m.basis.energies, set);
  const auto sum = summarize(traj, d, set, c.dynamics.bec_threshold);
  for (const auto& chk : sum.checks) {
    if (!chk.applicable) {
      s.add(mod, chk.name, true, chk.measured, chk.tolerance, chk.note);
      s.results.back().skipped = true;
      continue;
    }
    s.add(mod, chk.name, chk.passed, chk.measured, chk.tolerance, chk.note);
  }

  // Mass derivative of the limit field at a fixed pseudo-random state.
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> normal;
  StateVector G(K);
  for (auto& z : G) z = {normal(rng), normal(rng)};
  const auto dG = rhs_limit(G, set);
  double dm = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    dm += (std::conj(G[k]) * dG[k]).real();
    scale += std::abs(G[k]) * std::abs(dG[k]);
  }
  s.leq(mod, "mass_derivative_zero", std::abs(dm), 1e-13 * std::max(1.0, scale));

  // Phase equivariance.
  StateVector P0 = F0;
  std::vector<cplx> phase(K);
  for (std::size_t k = 0; k < K; ++k) {
    phase[k] = std::polar(1.0, 0.7 * static_cast<double>(k) + 0.3);
    P0[k] *= phase[k];
  }
  const double Tp = std::min(c.dynamics.T_end, 10.0);
  const auto tp = sample_times(Tp, 101);
  const auto a = integrate_limit(set, F0, tp, sopts);
  const auto b = integrate_limit(set, P0, tp, sopts);
  double eq = 0.0;
  for (std::size_t i = 0; i < tp.size(); ++i)
    for (std::size_t k = 0; k < K; ++k)
      eq = std::max(eq, std::abs(b.states[i][k] - phase[k] * a.states[i][k]));
  s.leq(mod, "phase_equivariance", eq, 100.0 * sopts.rtol);

  // Two-mode logistic exactness.
  const auto two = synthetic_logistic_coefficients(2, 1.0);
  const StateVector T0{std::sqrt(0.5), std::sqrt(0.5)};
  const auto tt = sample_times(1.0, 101);
  const auto tr = integrate_limit(two, T0, tt, sopts);
  double lerr = 0.0;
  for (std::size_t i = 0; i < tt.size(); ++i) {
    const double x = logistic_bound(0.5, 1.0, tt[i]);
    lerr = std::max(lerr, std::abs(std::norm(tr.states[i][0]) - x));
    lerr = std::max(lerr, std::abs(std::norm(tr.states[i][1]) - (1.0 - x)));
  }
  s.leq(mod, "two_mode_logistic", lerr, 1e-8, "x0 = 0.5, gamma = 1, T in [0, 1]");
}

void check_convergence(Suite& s, const SimulationConfig& c) {
  const std::string mod = "convergence-lab";
  const auto K = static_cast<std::size_t>(c.sweep.K);
  const auto model = build_model(c, K);
  const auto F0 = initial_state(c.sweep.initial, K, true);
  const auto etas = parse_eta_list(c.sweep.etas);
  SweepOptions so;
  so.samples = static_cast<std::size_t>(c.sweep.samples);
  so.noise_factor = c.sweep.noise_factor;
  so.coefficients = coefficient_options(c);
  so.solver = solver_options(c);
  const auto r = eta_sweep(model.resonance, F0, c.sweep.T0, etas, so);
  const auto again = eta_sweep(model.resonance, F0, c.sweep.T0, etas, so);

  s.add(mod, "sweep_strictly_decreasing", r.strictly_decreasing && r.rows.size() >= 2,
        r.rows.empty() ? 0.0 : r.rows.back().sup_distance, 0.0);
  s.add(mod, "sweep_non_increasing_within_noise", r.non_increasing, r.noise_factor, r.noise_factor);
  s.add(mod, "sweep_reduction_factor", r.reduction >= 2.0, r.reduction, 2.0,
        "sup-distance at largest eta / at smallest eta");
  double init = 0.0;
  for (const auto& row : r.rows) init = std::max(init, row.initial_distance);
  s.add(mod, "initial_distance_zero", init == 0.0, init, 0.0);
  bool same = r.rows.size() == again.rows.size();
  for (std::size_t i = 0; same && i < r.rows.size(); ++i)
    same = r.rows[i].sup_distance == again.rows[i].sup_distance &&
           r.rows[i].terminal_distance == again.rows[i].terminal_distance &&
           r.rows[i].mass_drift == again.rows[i].mass_drift;
  s.add(mod, "sweep_reproducible", same, 0.0, 0.0, "bitwise identical rows on rerun");
  bool drift_down = r.rows.size() >= 2;
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    drift_down = drift_down && r.rows[i].mass_drift < r.rows[i - 1].mass_drift;
  s.add(mod, "prelimit_mass_drift_decreasing", drift_down,
        r.rows.empty() ? 0.0 : r.rows.back().mass_drift, 0.0, "no exact conservation claimed");

  const auto t = model.resonance.assemble_prelimit_tensor(etas.empty() ? 0.1 : etas.back(),
                                                          coefficient_options(c));
  bool diag_zero = t.tensor->size() == K * K * K * K;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t kp = 0; kp < K; ++kp)
      diag_zero = diag_zero && t.tensor->mismatch[t.tensor->index(k, kp, k, kp)] == 0.0;
  s.add(mod, "tensor_shape", diag_zero, static_cast<double>(t.tensor->size()),
        static_cast<double>(K * K * K * K), "K^4 entries, zero mismatch on diagonal quadruples");
}

void check_cli(Suite& s, const SimulationConfig& c) {
  const std::string mod = "sim-cli";
  const auto round = parse_config_text(emit_config(c));
  s.add(mod, "config_round_trip", round == c && emit_config(round) == emit_config(c), 0.0, 0.0);
}

json checks_json(const std::vector<CheckResult>& results) {
  json arr = json::array();
  for (const auto& r : results)
    arr.push_back({{"module", r.module},
                   {"name", r.name},
                   {"passed", r.passed},
                   {"skipped", r.skipped},
                   {"measured", r.measured},
                   {"tolerance", r.tolerance},
                   {"note", r.note}});
  return arr;
}

}  // namespace

std::vector<CheckResult> run_checks(const SimulationConfig& c) {
  Suite s;
  const auto K = static_cast<std::size_t>(c.trap.K);
  const auto m = build_model(c, K);
  const auto opts = coefficient_options(c);
  const auto set = m.resonance.assemble_limit_matrix(opts);
  check_trap(s, c, m);
  check_coefficients(s, c, m, set);
  check_dynamics(s, c, m, set);
  check_convergence(s, c);
  check_cli(s, c);
  return s.results;
}

int run(Command cmd, const SimulationConfig& c, const RunOptions& opts) {
  validate(c);
  OutputDir out(opts.out_dir.empty() ? std::filesystem::path(c.output.dir) : opts.out_dir);
  const auto header = csv_header(c, cmd);
  const auto prov = provenance(c, cmd);
  int status = 0;
  json extra = json::object();

  switch (cmd) {
    case Command::spectrum: {
      const auto potential = make_potential(c);
      const auto basis = make_basis(c, static_cast<std::size_t>(c.trap.K));
      std::ostringstream csv;
      write_basis_csv(csv, basis, potential, header);
      out.write("basis.csv", csv.str());
      out.write("resonance.json", resonance_json(c, basis, potential, cmd));
      break;
    }
    case Command::coeffs: {
      const auto model = build_model(c, static_cast<std::size_t>(c.trap.K));
      const auto copts = coefficient_options(c);
      const auto set = c.dynamics.flow == "prelimit"
                           ? model.resonance.assemble_prelimit_tensor(c.dynamics.eta, copts)
                           : model.resonance.assemble_limit_matrix(copts);
      out.write("coefficients.json", coefficients_json(set, prov));
      std::ostringstream csv;
      write_limit_matrix_csv(csv, set, header);
      out.write("limit_matrix.csv", csv.str());
      break;
    }
    case Command::evolve: {
      std::vector<double> energies;
      const auto set = coefficients_for_dynamics(c, energies);
      const auto F0 = initial_state(c.dynamics.initial, set.K, c.dynamics.normalize);
      const auto times =
          sample_times(c.dynamics.T_end, static_cast<std::size_t>(c.dynamics.samples));
      const auto sopts = solver_options(c);
      const auto traj = set.tensor ? integrate_prelimit(set, F0, times, sopts)
                                   : integrate_limit(set, F0, times, sopts);
      const auto d = diagnostics(traj, energies, set);
      const auto summary = summarize(traj, d, set, c.dynamics.bec_threshold);
      auto head = header;
      head.push_back("K=" + std::to_string(set.K));
      head.push_back("eta=" + (traj.eta ? io::format_double(*traj.eta) : std::string("limit")));
      head.push_back("coefficients=" + (set.synthetic ? set.description : std::string("computed")));
      std::ostringstream csv;
      write_trajectory_csv(csv, traj, d, head);
      out.write("trajectory.csv", csv.str());
      out.write("diagnostics.json", diagnostics_json(traj, summary, prov));
      break;
    }
    case Command::converge: {
      const auto K = static_cast<std::size_t>(c.sweep.K);
      const auto model = build_model(c, K);
      const auto F0 = initial_state(c.sweep.initial, K, true);
      SweepOptions so;
      so.samples = static_cast<std::size_t>(c.sweep.samples);
      so.noise_factor = c.sweep.noise_factor;
      so.coefficients = coefficient_options(c);
      so.solver = solver_options(c);
      const auto r = eta_sweep(model.resonance, F0, c.sweep.T0, parse_eta_list(c.sweep.etas), so);
      out.write("convergence.json", convergence_json(r, prov));
      std::ostringstream csv;
      write_convergence_csv(csv, r, header);
      out.write("convergence.csv", csv.str());
      break;
    }
    case Command::check: {
      const auto results = run_checks(c);
      std::ostringstream csv;
      io::write_comments(csv, header);
      const std::vector<std::string> head{"module", "name", "passed", "measured", "tolerance"};
      io::write_row(csv, head);
      bool all = true;
      for (const auto& r : results) {
        all = all && r.passed;
        const std::vector<std::string> row{r.module, r.name,
                                           r.skipped ? "skip" : (r.passed ? "pass" : "fail"),
                                           io::format_double(r.measured),
                                           io::format_double(r.tolerance)};
        io::write_row(csv, row);
      }
      out.write("checks.csv", csv.str());
      extra["checks"] = checks_json(results);
      extra["all_passed"] = all;
      status = all ? 0 : 1;
      break;
    }
  }

  json manifest;
  manifest["command"] = to_string(cmd);
  manifest["version"] = std::string(io::kVersion);
  manifest["modules"] = modules_json();
  manifest["config_sha256"] = config_hash(c);
  manifest["config"] = config_echo(c);
  manifest["conventions"] = conventions_json(c);
  manifest["files"] = out.files();
  manifest["exit_code"] = status;
  for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
  out.write("manifest.json", manifest.dump(2) + "\n");
  return status;
}

std::string error_record_json(const std::string& command, const std::string& kind,
                              const std::string& code, const std::string& message, int exit_code) {
  json doc;
  doc["command"] = command;
  doc["error"] = {{"kind", kind}, {"code", code}, {"message", message}};
  doc["exit_code"] = exit_code;
  doc["version"] = std::string(io::kVersion);
  return doc.dump(2) + "\n";
}

}  // namespace cascade
