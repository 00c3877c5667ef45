#pragma once

#include <stdexcept>
#include <string>

namespace cascade {

/// Broad failure classes. The CLI maps each class onto its exit code.
enum class ErrorKind {
  config,     // unreadable or malformed configuration
  validation, // parameters outside their admissible range
  numerical,  // a computation could not produce a trustworthy result
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& what)
      : std::runtime_error(what), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Short machine-readable tag, e.g. "dimension" or "domain-truncation".
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

inline Error config_error(const std::string& what) {
  return Error(ErrorKind::config, "config", what);
}

inline Error validation_error(const std::string& what) {
  return Error(ErrorKind::validation, "validation", what);
}

inline Error dimension_error(const std::string& what) {
  return Error(ErrorKind::validation, "dimension", what);
}

inline Error numerical_error(std::string code, const std::string& what) {
  return Error(ErrorKind::numerical, std::move(code), what);
}

}  // namespace cascade
