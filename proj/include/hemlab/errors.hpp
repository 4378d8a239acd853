#pragma once

#include <stdexcept>
#include <string>

namespace hemlab {

/// Base of every error raised by the library. `code()` is the stable,
/// machine-readable identifier surfaced by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

#define HEMLAB_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

HEMLAB_DEFINE_ERROR(SingularMatrix)
HEMLAB_DEFINE_ERROR(ParseError)
HEMLAB_DEFINE_ERROR(ValidationError)
HEMLAB_DEFINE_ERROR(InsufficientLength)
HEMLAB_DEFINE_ERROR(ZeroLeadingCoefficient)
HEMLAB_DEFINE_ERROR(ZeroCoefficientInWindow)
HEMLAB_DEFINE_ERROR(GermNotConverged)
HEMLAB_DEFINE_ERROR(SingularRecursionMatrix)
HEMLAB_DEFINE_ERROR(SingularDenominatorSystem)
HEMLAB_DEFINE_ERROR(PoleHit)
HEMLAB_DEFINE_ERROR(AllRatiosAtNoiseFloor)
HEMLAB_DEFINE_ERROR(NoSampleNearAlphaHat)
HEMLAB_DEFINE_ERROR(ConfigError)

#undef HEMLAB_DEFINE_ERROR

}  // namespace hemlab
