#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cascade/coefficients.hpp"

namespace cascade {

using StateVector = std::vector<cplx>;

double mass(std::span<const cplx> F);

/// (dF/dT)_k = sum_k' M_{k,k'} |F_k'|^2 F_k.
void rhs_limit(const CoefficientSet& c, std::span<const cplx> F, std::span<cplx> dF);
StateVector rhs_limit(std::span<const cplx> F, const CoefficientSet& c);

/// (dF/dT)_k = sum_{k',j,j'} M^eta e^{i T dE / eta^2} F_j conj(F_j') F_k'. Remainder terms omitted.
void rhs_prelimit(double T, const CoefficientSet& c, std::span<const cplx> F, std::span<cplx> dF,
                  bool parallel = false);
StateVector rhs_prelimit(double T, std::span<const cplx> F, const CoefficientSet& c);

struct SolverOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  /// Upper bound on the step; 0 leaves the step unbounded.
  double max_dt = 0.0;
  /// Prelimit step cap as a fraction of the fastest phase period 2 pi eta^2 / max|dE|.
  double c_step = 0.1;
  double min_dt = 1e-14;
  std::size_t max_steps = 100'000'000;
  /// Project back onto the initial mass at every sample time.
  bool renormalize = false;
  bool parallel = false;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::string method = "dopri5";
  double rtol = 0.0;
  double atol = 0.0;
  double max_dt = 0.0;
  std::optional<double> eta;  // set for prelimit runs
  std::size_t steps = 0;

  std::size_t size() const noexcept { return times.size(); }
};

using Rhs = std::function<void(double, std::span<const cplx>, std::span<cplx>)>;

/// n >= 2 equally spaced times covering [0, T_end].
std::vector<double> sample_times(double T_end, std::size_t n);

/// Adaptive Dormand-Prince 4(5) with dense output at the requested times
/// (increasing, starting at 0).
Trajectory integrate(const Rhs& rhs, const StateVector& F0, std::span<const double> times,
                     const SolverOptions& opts = {});

Trajectory integrate_limit(const CoefficientSet& c, const StateVector& F0,
                           std::span<const double> times, const SolverOptions& opts = {});
/// Applies the c_step cap computed over the retained nonzero tensor entries.
Trajectory integrate_prelimit(const CoefficientSet& c, const StateVector& F0,
                              std::span<const double> times, const SolverOptions& opts = {});

/// 1 / (1 + ((1 - x0)/x0) e^{-2 gamma_tilde T}).
double logistic_bound(double x0, double gamma_tilde, double T);

struct DiagnosticsSeries {
  std::vector<double> mass;
  std::vector<double> energy;
  std::vector<double> ground;
  /// tail[K][i] = sum_{k > K} |F_k(T_i)|^2 for K = 0..K_modes-2.
  std::vector<std::vector<double>> tail;
  /// |F_0|^2 lower bound; empty when it does not apply.
  std::vector<double> logistic;
  double x0 = 0.0;
  double gamma_tilde = 0.0;
  std::size_t support = 0;  // largest index excited at T = 0
  std::string logistic_note;
};

/// Mass, energy, ground occupation, tail masses and the logistic trace. With
/// initial mass m != 1 the bound is m * logistic_bound(|F_0|^2/m, m gamma_tilde, T).
DiagnosticsSeries diagnostics(const Trajectory& traj, std::span<const double> energies,
                              const CoefficientSet& c);

struct InvariantCheck {
  std::string name;
  bool applicable = true;
  bool passed = true;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string note;
};

struct DiagnosticsSummary {
  double max_mass_drift = 0.0;
  double max_energy_increase = 0.0;
  double max_tail_increase = 0.0;
  double min_logistic_margin = 0.0;
  double final_excited_mass = 0.0;
  std::optional<double> condensation_time;  // first sample with excited mass < threshold
  std::vector<InvariantCheck> checks;
  bool all_passed() const;
};

/// Evaluates the flow invariants. Tolerances are 100 rtol (mass: 100 rtol T);
/// monotonicity and logistic checks only apply to limit flows.
DiagnosticsSummary summarize(const Trajectory& traj, const DiagnosticsSeries& d,
                             const CoefficientSet& c, double bec_threshold = 1e-3);

/// Columns T, ReF_k, ImF_k, mass, energy, ground_occupation, m_0..m_{K-2}, [logistic_bound].
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const DiagnosticsSeries& d,
                          std::span<const std::string> header_lines = {});

std::string diagnostics_json(const Trajectory& traj, const DiagnosticsSummary& s,
                             const std::string& provenance_json);

}  // namespace cascade
