#pragma once

#include <stdexcept>
#include <string>

namespace multcancel {

// Every failure raised by the library derives from Error; the CLI maps the
// category onto an exit code.
enum class ErrorKind {
  Config,      // invalid parameters, unknown names, Hölder violations
  Grid,        // a construction does not fit on the requested grid
  Domain,      // symbol evaluated on its singular set
  Numerical,   // non-finite values
  Sampler,     // every sample slot was rejected
  Construction,  // an atom failed its own certification
  Degenerate,  // zero input where a nonzero one is required
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define MULTCANCEL_DEFINE_ERROR(Name, Kind)                               \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

MULTCANCEL_DEFINE_ERROR(ConfigError, Config)
MULTCANCEL_DEFINE_ERROR(GridError, Grid)
MULTCANCEL_DEFINE_ERROR(DomainError, Domain)
MULTCANCEL_DEFINE_ERROR(NumericalError, Numerical)
MULTCANCEL_DEFINE_ERROR(SamplerError, Sampler)
MULTCANCEL_DEFINE_ERROR(ConstructionError, Construction)
MULTCANCEL_DEFINE_ERROR(DegenerateInputError, Degenerate)

#undef MULTCANCEL_DEFINE_ERROR

}  // namespace multcancel
