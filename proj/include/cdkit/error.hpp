#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cdkit {

enum class ErrorKind {
  parameter_domain,
  domain,
  monotonicity_violation,
  unsupported_representation,
  degenerate_sample,
  insufficient_replicates,
  optimization_failure,
  window_too_narrow,
  nonintegrable,
  partition_invalid,
  pairing,
  linear_algebra,
  map_domain,
  config,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parameter_domain: return "parameter-domain";
    case ErrorKind::domain: return "domain";
    case ErrorKind::monotonicity_violation: return "monotonicity-violation";
    case ErrorKind::unsupported_representation: return "unsupported-representation";
    case ErrorKind::degenerate_sample: return "degenerate-sample";
    case ErrorKind::insufficient_replicates: return "insufficient-replicates";
    case ErrorKind::optimization_failure: return "optimization-failure";
    case ErrorKind::window_too_narrow: return "window-too-narrow";
    case ErrorKind::nonintegrable: return "nonintegrable";
    case ErrorKind::partition_invalid: return "partition-invalid";
    case ErrorKind::pairing: return "pairing";
    case ErrorKind::linear_algebra: return "linear-algebra";
    case ErrorKind::map_domain: return "map-domain";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

/// Every failure raised by the library carries a kind so callers (and the
/// CLI exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace cdkit
