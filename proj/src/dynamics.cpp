#include "cascade/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <boost/numeric/odeint.hpp>
#include <json.hpp>

#include "cascade/error.hpp"
#include "cascade/io.hpp"
#include "cascade/kernels.hpp"

namespace cascade {

namespace ode = boost::numeric::odeint;

double mass(std::span<const cplx> F) {
  double m = 0.0;
  for (const auto& z : F) m += std::norm(z);
  return m;
}

void rhs_limit(const CoefficientSet& c, std::span<const cplx> F, std::span<cplx> dF) {
  const std::size_t K = c.K;
  if (F.size() != K || dF.size() != K) throw dimension_error("rhs_limit: state size mismatch");
  for (std::size_t k = 0; k < K; ++k) {
    cplx acc{0.0, 0.0};
    for (std::size_t kp = 0; kp < K; ++kp) acc += c.limit(k, kp) * std::norm(F[kp]);
    dF[k] = acc * F[k];
  }
}

StateVector rhs_limit(std::span<const cplx> F, const CoefficientSet& c) {
  StateVector out(F.size());
  rhs_limit(c, F, out);
  return out;
}

void rhs_prelimit(double T, const CoefficientSet& c, std::span<const cplx> F, std::span<cplx> dF,
                  bool parallel) {
  if (!c.tensor) throw validation_error("rhs_prelimit: coefficient set has no prelimit tensor");
  const auto& t = *c.tensor;
  if (F.size() != t.K || dF.size() != t.K)
    throw dimension_error("rhs_prelimit: state size mismatch");
  const kernels::PrelimitContraction job{t.K, t.coefficients, t.mismatch, T / (t.eta * t.eta)};
  if (parallel)
    kernels::omp::prelimit_contraction(job, F, dF);
  else
    kernels::serial::prelimit_contraction(job, F, dF);
}

StateVector rhs_prelimit(double T, std::span<const cplx> F, const CoefficientSet& c) {
  StateVector out(F.size());
  rhs_prelimit(T, c, F, out);
  return out;
}

std::vector<double> sample_times(double T_end, std::size_t n) {
  if (!(T_end > 0.0) || !std::isfinite(T_end))
    throw validation_error("sample_times: T_end must be positive");
  if (n < 2) throw validation_error("sample_times: need at least two samples");
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = T_end * static_cast<double>(i) / static_cast<double>(n - 1);
  t.back() = T_end;
  return t;
}

namespace {

bool finite_state(const StateVector& x) {
  for (const auto& z : x)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

}  // namespace

Trajectory integrate(const Rhs& rhs, const StateVector& F0, std::span<const double> times,
                     const SolverOptions& opts) {
  if (times.empty() || times.front() != 0.0)
    throw validation_error("integrate: sample times must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw validation_error("integrate: sample times must increase");
  if (!finite_state(F0)) throw numerical_error("non-finite", "integrate: initial state not finite");
  if (!(opts.rtol > 0.0) || !(opts.atol > 0.0))
    throw validation_error("integrate: tolerances must be positive");

  Trajectory traj;
  traj.rtol = opts.rtol;
  traj.atol = opts.atol;
  traj.max_dt = opts.max_dt;
  traj.times.assign(times.begin(), times.end());
  traj.states.reserve(times.size());
  traj.states.push_back(F0);
  if (times.size() == 1) return traj;

  auto system = [&rhs](const StateVector& x, StateVector& dx, double t) {
    dx.resize(x.size());
    rhs(t, x, dx);
  };
  auto stepper = ode::make_dense_output(opts.atol, opts.rtol, opts.max_dt,
                                        ode::runge_kutta_dopri5<StateVector>());
  const double T_end = times.back();
  double dt0 = std::min(1e-3, 1e-3 * T_end);
  if (opts.max_dt > 0.0) dt0 = std::min(dt0, opts.max_dt);
  stepper.initialize(F0, 0.0, dt0);
  const double target_mass = mass(F0);

  StateVector x(F0.size());
  for (std::size_t i = 1; i < times.size(); ++i) {
    while (stepper.current_time() < times[i]) {
      try {
        stepper.do_step(system);
      } catch (const ode::step_adjustment_error& e) {
        throw numerical_error("step-underflow", std::string("integrate: ") + e.what());
      }
      ++traj.steps;
      if (!finite_state(stepper.current_state()))
        throw numerical_error("non-finite", "integrate: NaN/Inf at T = " +
                                                io::format_double(stepper.current_time()));
      if (stepper.current_time() < times[i] && stepper.current_time_step() < opts.min_dt)
        throw numerical_error("step-underflow", "integrate: step below " +
                                                    io::format_double(opts.min_dt) + " at T = " +
                                                    io::format_double(stepper.current_time()));
      if (traj.steps > opts.max_steps)
        throw numerical_error("step-limit", "integrate: step budget exhausted");
    }
    stepper.calc_state(times[i], x);
    if (opts.renormalize && target_mass > 0.0) {
      const double m = mass(x);
      if (m > 0.0)
        for (auto& z : x) z *= std::sqrt(target_mass / m);
      stepper.initialize(x, times[i], stepper.current_time_step());
    }
    traj.states.push_back(x);
  }
  return traj;
}

Trajectory integrate_limit(const CoefficientSet& c, const StateVector& F0,
                           std::span<const double> times, const SolverOptions& opts) {
  if (F0.size() != c.K) throw dimension_error("integrate_limit: initial state has wrong size");
  const Rhs rhs = [&c](double, std::span<const cplx> F, std::span<cplx> dF) {
    rhs_limit(c, F, dF);
  };
  return integrate(rhs, F0, times, opts);
}

Trajectory integrate_prelimit(const CoefficientSet& c, const StateVector& F0,
                              std::span<const double> times, const SolverOptions& opts) {
  if (!c.tensor) throw validation_error("integrate_prelimit: no prelimit tensor");
  if (F0.size() != c.K) throw dimension_error("integrate_prelimit: initial state has wrong size");
  const auto& t = *c.tensor;
  double max_gap = 0.0;
  for (std::size_t q = 0; q < t.size(); ++q)
    if (t.coefficients[q] != cplx{}) max_gap = std::max(max_gap, std::abs(t.mismatch[q]));
  SolverOptions capped = opts;
  if (max_gap > 0.0) {
    const double cap = opts.c_step * 2.0 * std::numbers::pi * t.eta * t.eta / max_gap;
    capped.max_dt = opts.max_dt > 0.0 ? std::min(opts.max_dt, cap) : cap;
  }
  const bool par = opts.parallel;
  const Rhs rhs = [&c, par](double T, std::span<const cplx> F, std::span<cplx> dF) {
    rhs_prelimit(T, c, F, dF, par);
  };
  auto traj = integrate(rhs, F0, times, capped);
  traj.eta = t.eta;
  return traj;
}

double logistic_bound(double x0, double gamma_tilde, double T) {
  if (!(x0 > 0.0 && x0 <= 1.0)) throw validation_error("logistic_bound: x0 must lie in (0, 1]");
  if (!(gamma_tilde > 0.0)) throw validation_error("logistic_bound: rate must be positive");
  return 1.0 / (1.0 + ((1.0 - x0) / x0) * std::exp(-2.0 * gamma_tilde * T));
}

DiagnosticsSeries diagnostics(const Trajectory& traj, std::span<const double> energies,
                              const CoefficientSet& c) {
  DiagnosticsSeries d;
  const std::size_t n = traj.size();
  if (n == 0) return d;
  const std::size_t K = traj.states.front().size();
  if (energies.size() != K || c.K != K) throw dimension_error("diagnostics: size mismatch");
  d.mass.resize(n);
  d.energy.resize(n);
  d.ground.resize(n);
  d.tail.assign(K >= 2 ? K - 1 : 0, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& F = traj.states[i];
    double m = 0.0, e = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      m += std::norm(F[k]);
      e += energies[k] * std::norm(F[k]);
    }
    d.mass[i] = m;
    d.energy[i] = e;
    d.ground[i] = std::norm(F[0]);
    // Suffix sums, accumulated from the top mode down.
    double acc = 0.0;
    for (std::size_t k = K; k-- > 1;) {
      acc += std::norm(F[k]);
      d.tail[k - 1][i] = acc;
    }
  }

  const auto& F0 = traj.states.front();
  for (std::size_t k = 0; k < K; ++k)
    if (F0[k] != cplx{}) d.support = k;
  const double m0 = d.mass.front();
  if (m0 == 0.0 || d.ground.front() == 0.0) {
    d.logistic_note = "omitted: zero initial ground occupation";
    return d;
  }
  d.x0 = d.ground.front() / m0;
  if (d.support == 0) {
    d.logistic_note = "omitted: only the ground mode is occupied";
    return d;
  }
  double gt = std::numeric_limits<double>::infinity();
  for (std::size_t kp = 1; kp <= d.support; ++kp) gt = std::min(gt, c.gamma_eff(0, kp));
  d.gamma_tilde = gt;
  if (!(gt > 0.0)) {
    d.logistic_note = "omitted: a ground-row rate vanishes";
    return d;
  }
  d.logistic.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    d.logistic[i] = m0 * logistic_bound(d.x0, m0 * gt, traj.times[i]);
  d.logistic_note = "applied";
  return d;
}

bool DiagnosticsSummary::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const InvariantCheck& c) { return !c.applicable || c.passed; });
}

DiagnosticsSummary summarize(const Trajectory& traj, const DiagnosticsSeries& d,
                             const CoefficientSet& c, double bec_threshold) {
  DiagnosticsSummary s;
  const std::size_t n = traj.size();
  if (n == 0) return s;
  const bool limit_flow = !traj.eta.has_value();
  const double tol = 100.0 * traj.rtol;

  bool mass_ok = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double drift = std::abs(d.mass[i] - d.mass.front());
    s.max_mass_drift = std::max(s.max_mass_drift, drift);
    if (drift > tol * traj.times[i]) mass_ok = false;
  }
  for (std::size_t i = 1; i < n; ++i) {
    s.max_energy_increase = std::max(s.max_energy_increase, d.energy[i] - d.energy[i - 1]);
    for (const auto& m : d.tail)
      s.max_tail_increase = std::max(s.max_tail_increase, m[i] - m[i - 1]);
  }
  s.final_excited_mass = d.mass.back() - d.ground.back();
  for (std::size_t i = 0; i < n; ++i)
    if (d.mass[i] - d.ground[i] < bec_threshold) {
      s.condensation_time = traj.times[i];
      break;
    }

  const std::string flow = limit_flow ? "" : "measured only for prelimit flows";
  s.checks.push_back({"mass_conservation", limit_flow, mass_ok, s.max_mass_drift,
                      tol * traj.times.back(), limit_flow ? "|m(T) - m(0)| <= 100 rtol T" : flow});
  s.checks.push_back({"energy_monotone", limit_flow, s.max_energy_increase <= tol,
                      s.max_energy_increase, tol, flow});
  s.checks.push_back({"tail_monotone", limit_flow, s.max_tail_increase <= tol, s.max_tail_increase,
                      tol, flow});

  InvariantCheck logi{"logistic_domination", limit_flow && !d.logistic.empty(), true, 0.0, tol,
                      d.logistic_note};
  if (!d.logistic.empty()) {
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) margin = std::min(margin, d.ground[i] - d.logistic[i]);
    s.min_logistic_margin = margin;
    logi.measured = margin;
    logi.passed = margin >= -tol;
  }
  s.checks.push_back(logi);

  // Condensation needs every ground-row rate to be positive.
  bool rates_ok = c.K >= 2;
  for (std::size_t kp = 1; kp < c.K; ++kp) rates_ok = rates_ok && c.gamma_eff(0, kp) > 1e-14;
  InvariantCheck bec{"bec_formation", limit_flow && rates_ok && d.ground.front() > 0.0,
                     s.condensation_time.has_value(), s.final_excited_mass, bec_threshold, ""};
  if (!rates_ok) bec.note = "skipped: a ground-row rate is below 1e-14";
  else if (s.condensation_time) bec.note = "reached at T = " + io::format_double(*s.condensation_time);
  else bec.note = "not reached within the horizon";
  s.checks.push_back(bec);
  return s;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const DiagnosticsSeries& d,
                          std::span<const std::string> header_lines) {
  io::write_comments(out, header_lines);
  if (traj.size() == 0) return;
  const std::size_t K = traj.states.front().size();
  std::vector<std::string> head{"T"};
  for (std::size_t k = 0; k < K; ++k) {
    head.push_back("ReF_" + std::to_string(k));
    head.push_back("ImF_" + std::to_string(k));
  }
  head.insert(head.end(), {"mass", "energy", "ground_occupation"});
  for (std::size_t m = 0; m < d.tail.size(); ++m) head.push_back("m_" + std::to_string(m));
  if (!d.logistic.empty()) head.push_back("logistic_bound");
  io::write_row(out, head);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    std::vector<std::string> row{io::format_double(traj.times[i])};
    for (const auto& z : traj.states[i]) {
      row.push_back(io::format_double(z.real()));
      row.push_back(io::format_double(z.imag()));
    }
    row.push_back(io::format_double(d.mass[i]));
    row.push_back(io::format_double(d.energy[i]));
    row.push_back(io::format_double(d.ground[i]));
    for (const auto& m : d.tail) row.push_back(io::format_double(m[i]));
    if (!d.logistic.empty()) row.push_back(io::format_double(d.logistic[i]));
    io::write_row(out, row);
  }
}

std::string diagnostics_json(const Trajectory& traj, const DiagnosticsSummary& s,
                             const std::string& provenance_json) {
  nlohmann::json doc;
  doc["solver"] = {{"method", traj.method}, {"rtol", traj.rtol},   {"atol", traj.atol},
                   {"max_dt", traj.max_dt}, {"steps", traj.steps}, {"samples", traj.size()}};
  doc["flow"] = traj.eta ? "prelimit" : "limit";
  if (traj.eta) doc["eta"] = *traj.eta;
  doc["measured"] = {{"max_mass_drift", s.max_mass_drift},
                     {"max_energy_increase", s.max_energy_increase},
                     {"max_tail_increase", s.max_tail_increase},
                     {"min_logistic_margin", s.min_logistic_margin},
                     {"final_excited_mass", s.final_excited_mass}};
  doc["measured"]["condensation_time"] =
      s.condensation_time ? nlohmann::json(*s.condensation_time) : nlohmann::json(nullptr);
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : s.checks)
    checks.push_back({{"name", c.name},
                      {"applicable", c.applicable},
                      {"passed", c.passed},
                      {"measured", c.measured},
                      {"tolerance", c.tolerance},
                      {"note", c.note}});
  doc["checks"] = checks;
  doc["all_passed"] = s.all_passed();
  doc["provenance"] = nlohmann::json::parse(provenance_json.empty() ? "{}" : provenance_json);
  return doc.dump(2) + "\n";
}

}  // namespace cascade
