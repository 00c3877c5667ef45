#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cascade/coefficients.hpp"
#include "cascade/dynamics.hpp"

namespace cascade {

struct ConvergenceRow {
  double eta = 0.0;
  double epsilon = 0.0;
  double sup_distance = 0.0;       // max over samples of ||F^eta - F||
  double terminal_distance = 0.0;  // at T0
  double initial_distance = 0.0;
  double mass_drift = 0.0;         // max |m^eta(T) - m(0)|
  std::size_t steps = 0;
};

struct ConvergenceReport {
  double T0 = 0.0;
  std::size_t samples = 0;
  double noise_factor = 1.2;
  std::vector<ConvergenceRow> rows;
  bool non_increasing = true;       // d_{i+1} <= noise_factor d_i
  bool strictly_decreasing = true;  // d_{i+1} < d_i
  double reduction = 0.0;           // d(largest eta) / d(smallest eta)
  double limit_mass_drift = 0.0;
};

struct SweepOptions {
  std::size_t samples = 256;
  double noise_factor = 1.2;
  CoefficientOptions coefficients{};
  SolverOptions solver{};
  /// Run the eta values concurrently.
  bool parallel = true;
};

/// Limit trajectory once, then one prelimit trajectory per eta (same F0), all
/// sampled on a common grid of `samples` points over [0, T0].
ConvergenceReport eta_sweep(const ResonanceModel& model, const StateVector& F0, double T0,
                            std::span<const double> etas, const SweepOptions& opts = {});

/// As above with precomputed coefficient sets (the limit set and one tensor set per eta).
ConvergenceReport eta_sweep(const CoefficientSet& limit, std::span<const CoefficientSet> prelimit,
                            const StateVector& F0, double T0, const SweepOptions& opts = {});

std::string convergence_json(const ConvergenceReport& r, const std::string& provenance_json);
void write_convergence_csv(std::ostream& out, const ConvergenceReport& r,
                           std::span<const std::string> header_lines = {});

}  // namespace cascade
