#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wdrc {

/// Failure categories. The CLI maps them onto exit codes.
enum class ErrorKind {
  InvalidInput,   ///< caller passed data violating a precondition
  Configuration,  ///< malformed or inconsistent configuration
  OutOfDomain,    ///< a state fell outside the computational domain
  Numerical,      ///< non-finite values, singular pivots, lost definiteness
  NotConverged,   ///< iteration budget exhausted
  Unsupported,    ///< a regime the implementation does not cover
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// 2 for configuration-type failures, 3 for numerical ones.
  int exit_code() const noexcept;

 private:
  ErrorKind kind_;
};

#define WDRC_DEFINE_ERROR(Name, Kind)                                      \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

WDRC_DEFINE_ERROR(InvalidInputError, InvalidInput)
WDRC_DEFINE_ERROR(ConfigurationError, Configuration)
WDRC_DEFINE_ERROR(OutOfDomainError, OutOfDomain)
WDRC_DEFINE_ERROR(NumericalError, Numerical)
WDRC_DEFINE_ERROR(NotConvergedError, NotConverged)
WDRC_DEFINE_ERROR(UnsupportedError, Unsupported)

#undef WDRC_DEFINE_ERROR

/// Warnings go to stderr unless silenced; tests silence them.
void log_warning(const std::string& message);
void set_warnings_enabled(bool enabled);
bool warnings_enabled();

}  // namespace wdrc
