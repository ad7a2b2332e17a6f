#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stou {

enum class ErrorKind {
  InvalidArgument,
  BudgetExceeded,
  NotPositiveDefinite,
  DimensionMismatch,
  DegenerateSample,
  InsufficientUsableLags,
  CorrelationAtUnity,
  NoValidWindows,
  SingularH,
  FailureRateExceeded,
  ConfigInvalid,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can dispatch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Non-fatal diagnostics (jitter fallback, shallow kernel truncation, ...).
// The default sink writes to stderr. Thread-safe.
using WarningSink = std::function<void(std::string_view)>;

WarningSink set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace stou
