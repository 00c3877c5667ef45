#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cascade/coefficients.hpp"
#include "cascade/dynamics.hpp"

namespace cascade {

struct SimulationConfig {
  struct Trap {
    std::string kind = "anharmonic";  // harmonic | anharmonic
    double omega = 0.02;
    double beta = 2e-4;
    double r_max = 40.0;
    long long n_points = 2000;
    long long K = 6;
    double decay_tol = 1e-6;
    double gap_tol = 1e-8;
    bool operator==(const Trap&) const = default;
  } trap;

  struct Kernels {
    double w_amplitude = 3.0;
    double w_width = 0.5;
    double v_amplitude = 1.0;
    double v_width = 1.0;
    double s = 1.0;  // weight exponent of the (1 + r^2)^s norm
    bool operator==(const Kernels&) const = default;
  } kernels;

  struct Momentum {
    double rho_max = 0.0;  // 0: 4 max|dE| + 8
    long long n_rho = 4096;
    bool operator==(const Momentum&) const = default;
  } momentum;

  struct Conventions {
    bool fgr_pi = true;
    std::string epsilon_policy = "eta2";
    bool direct_terms = true;
    std::string tensor_filter = "all";
    long long tensor_max_K = 12;
    bool operator==(const Conventions&) const = default;
  } conventions;

  struct Dynamics {
    std::string coefficients = "computed";  // computed | logistic(G)
    std::string initial = "uniform(4)";
    std::string flow = "limit";              // limit | prelimit
    double eta = 0.1;
    double T_end = 200.0;
    double rtol = 1e-9;
    double atol = 1e-12;
    long long samples = 2001;
    double c_step = 0.1;
    bool normalize = true;
    bool renormalize = false;
    double bec_threshold = 1e-3;
    bool operator==(const Dynamics&) const = default;
  } dynamics;

  struct Sweep {
    std::string etas = "0.2, 0.1, 0.05";
    long long K = 4;
    std::string initial = "uniform(4)";
    double T0 = 1.0;
    long long samples = 256;
    double noise_factor = 1.2;
    bool operator==(const Sweep&) const = default;
  } sweep;

  struct Output {
    std::string dir = "out";
    bool operator==(const Output&) const = default;
  } output;

  bool operator==(const SimulationConfig&) const = default;
};

/// Sectioned key = value text. Unknown sections or keys, malformed values and
/// missing files raise config errors; range checks are left to validate().
SimulationConfig parse_config_text(const std::string& text);
SimulationConfig parse_config(const std::string& path);

/// Canonical text form with every field; parse(emit(c)) == c.
std::string emit_config(const SimulationConfig& c);

/// Throws a validation error for out-of-range parameters.
void validate(const SimulationConfig& c);

/// SHA-256 of the canonical text form.
std::string config_hash(const SimulationConfig& c);

/// Initial amplitudes for K modes from a preset ("ground-only", "two-mode(x0)",
/// "uniform(n)", "geometric(q)") or a whitespace-separated list of complex
/// numbers written as re or (re,im). uniform(n) with n > K fills all K modes.
/// Normalised to unit mass when asked.
StateVector initial_state(const std::string& spec, std::size_t K, bool normalize);

std::vector<double> parse_eta_list(const std::string& s);

/// Logistic rate when the coefficient source is "logistic(G)"; nothing for "computed".
std::optional<double> synthetic_rate(const std::string& source);

CoefficientOptions coefficient_options(const SimulationConfig& c);
SolverOptions solver_options(const SimulationConfig& c);

}  // namespace cascade
