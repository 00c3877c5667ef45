#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cascade/coefficients.hpp"
#include "cascade/config.hpp"
#include "cascade/trap_spectrum.hpp"

namespace cascade {

enum class Command { spectrum, coeffs, evolve, converge, check };

Command parse_command(const std::string& name);
std::string to_string(Command c);

/// Everything derived from the trap and kernel sections for a given K.
struct Model {
  Potential potential;
  RadialGrid grid;
  EigenBasis basis;
  MomentumGrid momenta;
  InteractionKernel w;
  InteractionKernel v;
  ResonanceModel resonance;
};

Potential make_potential(const SimulationConfig& c);
EigenBasis make_basis(const SimulationConfig& c, std::size_t K);
/// Momentum grid for the basis; rho_max defaults to 4 max|dE| + 8. The `refine`
/// factor multiplies the interval count.
MomentumGrid make_momenta(const SimulationConfig& c, const EigenBasis& basis, std::size_t refine = 1);
Model build_model(const SimulationConfig& c, std::size_t K, std::size_t refine = 1,
                  bool parallel = true);

struct CheckResult {
  std::string module;
  std::string name;
  bool passed = false;
  bool skipped = false;  // not applicable to this configuration; counts as passed
  double measured = 0.0;
  double tolerance = 0.0;
  std::string note;
};

/// Runs the invariant suite for a configuration.
std::vector<CheckResult> run_checks(const SimulationConfig& c);

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<long long> seed;  // reserved
};

/// Executes one command and writes its files plus manifest.json into the
/// output directory. Returns 0, or 1 when a check fails. Errors propagate as
/// cascade::Error.
int run(Command cmd, const SimulationConfig& c, const RunOptions& opts);

/// Machine-readable error record written next to the manifest on failure.
std::string error_record_json(const std::string& command, const std::string& kind,
                              const std::string& code, const std::string& message, int exit_code);

}  // namespace cascade
