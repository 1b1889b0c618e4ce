#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rrdo {

enum class ErrorKind {
  kInvalidInput,
  kNumericalFailure,
  kGapViolation,
  kNotAnRrdo,
  kReferenceNotSeparating,
  kSampleRejected,
  kMeanNotInME,
  kNotConverged,
  kUnsupportedParameter,
  kUndefined,
  kHypothesisViolated,
  kUsage,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` distinguishes the
/// failure classes callers are expected to branch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace rrdo
