#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pathgraph {

enum class ErrorKind {
  invalid_argument,
  invalid_input,
  shape,
  index,
  parse,
  unsupported_version,
  config,
  undefined_kappa,
  io,
  numeric,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` lets callers (the CLI in
/// particular) map failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::shape: return "shape";
    case ErrorKind::index: return "index";
    case ErrorKind::parse: return "parse";
    case ErrorKind::unsupported_version: return "unsupported-version";
    case ErrorKind::config: return "config";
    case ErrorKind::undefined_kappa: return "undefined-kappa";
    case ErrorKind::io: return "io";
    case ErrorKind::numeric: return "numeric";
  }
  return "unknown";
}

}  // namespace pathgraph
