#pragma once

#include <stdexcept>
#include <string>

namespace rlab {

enum class ErrorKind {
  argument,
  domain,
  range,
  capacity,
  config,
  consistency,
  unsupported,
  empty_resonator,
};

// Every failure raised by the library carries a kind so that front ends can
// map it to an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::argument: return "argument";
    case ErrorKind::domain: return "domain";
    case ErrorKind::range: return "range";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::config: return "config";
    case ErrorKind::consistency: return "consistency";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::empty_resonator: return "empty_resonator";
  }
  return "unknown";
}

}  // namespace rlab
