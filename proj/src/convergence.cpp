#include "cascade/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>

#include <json.hpp>

#include "cascade/error.hpp"
#include "cascade/io.hpp"

namespace cascade {

namespace {

void check_etas(std::span<const double> etas) {
  for (std::size_t i = 0; i < etas.size(); ++i) {
    if (!(etas[i] > 0.0) || !std::isfinite(etas[i]))
      throw validation_error("eta sweep: eta values must be positive");
    if (i > 0 && !(etas[i] < etas[i - 1]))
      throw validation_error("eta sweep: eta values must be strictly decreasing");
  }
}

double distance(const StateVector& a, const StateVector& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::norm(a[k] - b[k]);
  return std::sqrt(s);
}

ConvergenceRow compare(const Trajectory& limit, const Trajectory& pre, double eta, double eps) {
  ConvergenceRow row;
  row.eta = eta;
  row.epsilon = eps;
  row.steps = pre.steps;
  const double m0 = mass(pre.states.front());
  for (std::size_t i = 0; i < limit.size(); ++i) {
    const double d = distance(pre.states[i], limit.states[i]);
    row.sup_distance = std::max(row.sup_distance, d);
    row.mass_drift = std::max(row.mass_drift, std::abs(mass(pre.states[i]) - m0));
  }
  row.initial_distance = distance(pre.states.front(), limit.states.front());
  row.terminal_distance = distance(pre.states.back(), limit.states.back());
  return row;
}

void finish(ConvergenceReport& r, const Trajectory& limit) {
  const double m0 = mass(limit.states.front());
  for (const auto& s : limit.states)
    r.limit_mass_drift = std::max(r.limit_mass_drift, std::abs(mass(s) - m0));
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const double prev = r.rows[i - 1].sup_distance, cur = r.rows[i].sup_distance;
    r.non_increasing = r.non_increasing && cur <= r.noise_factor * prev;
    r.strictly_decreasing = r.strictly_decreasing && cur < prev;
  }
  if (!r.rows.empty() && r.rows.back().sup_distance > 0.0)
    r.reduction = r.rows.front().sup_distance / r.rows.back().sup_distance;
}

template <class Body>
void run_each(std::size_t n, bool parallel, Body body) {
  std::exception_ptr failure;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(cascade_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::string eta_context(double eta) { return "eta = " + io::format_double(eta) + ": "; }

}  // namespace

ConvergenceReport eta_sweep(const ResonanceModel& model, const StateVector& F0, double T0,
                            std::span<const double> etas, const SweepOptions& opts) {
  check_etas(etas);
  ConvergenceReport report;
  report.T0 = T0;
  report.samples = opts.samples;
  report.noise_factor = opts.noise_factor;
  if (etas.empty()) return report;

  const auto times = sample_times(T0, opts.samples);
  CoefficientOptions copts = opts.coefficients;
  const auto limit_set = model.assemble_limit_matrix(copts);
  const auto limit = integrate_limit(limit_set, F0, times, opts.solver);

  copts.parallel = copts.parallel && !opts.parallel;
  report.rows.resize(etas.size());
  run_each(etas.size(), opts.parallel, [&](std::size_t i) {
    try {
      const auto set = model.assemble_prelimit_tensor(etas[i], copts);
      const auto pre = integrate_prelimit(set, F0, times, opts.solver);
      report.rows[i] = compare(limit, pre, etas[i], set.tensor->epsilon);
    } catch (const Error& e) {
      throw Error(e.kind(), e.code(), eta_context(etas[i]) + e.what());
    }
  });
  finish(report, limit);
  return report;
}

ConvergenceReport eta_sweep(const CoefficientSet& limit_set, std::span<const CoefficientSet> prelimit,
                            const StateVector& F0, double T0, const SweepOptions& opts) {
  std::vector<double> etas;
  for (const auto& c : prelimit) {
    if (!c.tensor) throw validation_error("eta sweep: coefficient set without tensor");
    etas.push_back(c.tensor->eta);
  }
  check_etas(etas);
  ConvergenceReport report;
  report.T0 = T0;
  report.samples = opts.samples;
  report.noise_factor = opts.noise_factor;
  if (etas.empty()) return report;

  const auto times = sample_times(T0, opts.samples);
  const auto limit = integrate_limit(limit_set, F0, times, opts.solver);
  report.rows.resize(etas.size());
  run_each(etas.size(), opts.parallel, [&](std::size_t i) {
    try {
      const auto pre = integrate_prelimit(prelimit[i], F0, times, opts.solver);
      report.rows[i] = compare(limit, pre, etas[i], prelimit[i].tensor->epsilon);
    } catch (const Error& e) {
      throw Error(e.kind(), e.code(), eta_context(etas[i]) + e.what());
    }
  });
  finish(report, limit);
  return report;
}

std::string convergence_json(const ConvergenceReport& r, const std::string& provenance_json) {
  nlohmann::json doc;
  doc["T0"] = r.T0;
  doc["samples"] = r.samples;
  doc["noise_factor"] = r.noise_factor;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"eta", row.eta},
                    {"epsilon", row.epsilon},
                    {"sup_distance", row.sup_distance},
                    {"terminal_distance", row.terminal_distance},
                    {"initial_distance", row.initial_distance},
                    {"mass_drift", row.mass_drift},
                    {"steps", row.steps}});
  doc["rows"] = rows;
  doc["verdict"] = {{"non_increasing", r.non_increasing},
                    {"strictly_decreasing", r.strictly_decreasing},
                    {"reduction", r.reduction}};
  doc["limit_mass_drift"] = r.limit_mass_drift;
  doc["provenance"] = nlohmann::json::parse(provenance_json.empty() ? "{}" : provenance_json);
  return doc.dump(2) + "\n";
}

void write_convergence_csv(std::ostream& out, const ConvergenceReport& r,
                           std::span<const std::string> header_lines) {
  io::write_comments(out, header_lines);
  const std::vector<std::string> head{"eta", "sup_distance", "terminal_distance", "mass_drift"};
  io::write_row(out, head);
  for (const auto& row : r.rows) {
    const std::vector<std::string> cells{io::format_double(row.eta),
                                         io::format_double(row.sup_distance),
                                         io::format_double(row.terminal_distance),
                                         io::format_double(row.mass_drift)};
    io::write_row(out, cells);
  }
}

}  // namespace cascade
