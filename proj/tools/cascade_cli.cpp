#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cascade/config.hpp"
#include "cascade/error.hpp"
#include "cascade/kernels.hpp"
#include "cascade/pipeline.hpp"

namespace {

int exit_code(cascade::ErrorKind kind) {
  switch (kind) {
    case cascade::ErrorKind::config: return 2;
    case cascade::ErrorKind::validation: return 3;
    default: return 4;
  }
}

std::string kind_name(cascade::ErrorKind kind) {
  switch (kind) {
    case cascade::ErrorKind::config: return "config";
    case cascade::ErrorKind::validation: return "validation";
    default: return "numerical";
  }
}

void write_error(const std::filesystem::path& dir, const std::string& record) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return;
  std::ofstream(dir / "error.json", std::ios::binary | std::ios::trunc) << record;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resonance cascade laboratory"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<long long> seed;
  int threads = 0;
  app.add_option("command", command, "spectrum | coeffs | evolve | converge | check")
      ->required()
      ->check(CLI::IsMember({"spectrum", "coeffs", "evolve", "converge", "check"}));
  app.add_option("-c,--config", config_path, "configuration file (defaults when omitted)");
  app.add_option("-o,--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed", seed, "accepted for interface stability; runs are deterministic");
  app.add_option("-t,--threads", threads, "OpenMP threads (0: runtime default)")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (threads > 0) cascade::kernels::set_threads(threads);

  std::filesystem::path dir = out_dir;
  try {
    cascade::SimulationConfig cfg;
    if (!config_path.empty()) cfg = cascade::parse_config(config_path);
    if (dir.empty()) dir = cfg.output.dir;
    const int status = cascade::run(cascade::parse_command(command), cfg, {dir, seed});
    if (status != 0) std::cerr << "cascade-lab: one or more checks failed\n";
    return status;
  } catch (const cascade::Error& e) {
    const int code = exit_code(e.kind());
    if (dir.empty()) dir = "out";
    write_error(dir, cascade::error_record_json(command, kind_name(e.kind()), e.code(), e.what(), code));
    std::cerr << "cascade-lab: " << kind_name(e.kind()) << " error (" << e.code() << "): " << e.what()
              << '\n';
    return code;
  } catch (const std::exception& e) {
    if (dir.empty()) dir = "out";
    write_error(dir, cascade::error_record_json(command, "numerical", "internal", e.what(), 4));
    std::cerr << "cascade-lab: " << e.what() << '\n';
    return 4;
  }
}
