#pragma once

#include <stdexcept>
#include <string>

namespace gist {

enum class ErrorKind {
  parse,
  index,
  unsupported_element,
  degenerate,
  parameter,
  size,
  shape,
  zero_degree,
  integration,
  undefined_value,
  report,
  generation,
  divergence,
  io,
  verification,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::index: return "index";
    case ErrorKind::unsupported_element: return "unsupported-element";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::size: return "size";
    case ErrorKind::shape: return "shape";
    case ErrorKind::zero_degree: return "zero-degree";
    case ErrorKind::integration: return "integration";
    case ErrorKind::undefined_value: return "undefined-value";
    case ErrorKind::report: return "report";
    case ErrorKind::generation: return "generation";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::io: return "io";
    case ErrorKind::verification: return "verification";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace gist
