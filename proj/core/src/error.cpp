#include "rrdo/error.hpp"

namespace rrdo {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kNumericalFailure: return "numerical-failure";
    case ErrorKind::kGapViolation: return "gap-violation";
    case ErrorKind::kNotAnRrdo: return "not-an-rrdo";
    case ErrorKind::kReferenceNotSeparating: return "reference-not-separating";
    case ErrorKind::kSampleRejected: return "sample-rejected";
    case ErrorKind::kMeanNotInME: return "mean-not-in-ME";
    case ErrorKind::kNotConverged: return "not-converged";
    case ErrorKind::kUnsupportedParameter: return "unsupported-parameter";
    case ErrorKind::kUndefined: return "undefined";
    case ErrorKind::kHypothesisViolated: return "hypothesis-violated";
    case ErrorKind::kUsage: return "usage";
  }
  return "unknown";
}

}  // namespace rrdo
