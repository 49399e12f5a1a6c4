#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tailbound {

enum class ErrorCode {
  config,
  invalid_domain,
  contract,
  domain,
  unbounded_conjugate,
  extrapolation,
  resource,
  divergence,
  summability,
  centering,
  degenerate,
  unresolved_sup,
  io,
};

/// Stable machine-readable name, e.g. "UNBOUNDED_CONJUGATE".
std::string_view code_name(ErrorCode code);

/// Process exit status used by the CLI for each error class.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<double> value = std::nullopt)
      : std::runtime_error(message), code_(code), value_(value) {}

  ErrorCode code() const noexcept { return code_; }

  /// Numeric payload where one is meaningful: the offending x for an
  /// unbounded conjugate, the threshold u0 for an out-of-range u.
  std::optional<double> value() const noexcept { return value_; }

 private:
  ErrorCode code_;
  std::optional<double> value_;
};

}  // namespace tailbound
