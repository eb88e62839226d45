#pragma once
#include <stdexcept>
#include <string>

namespace riemalpha {

// Failure vocabulary shared across the library. Operations whose return type
// can express failure (brackets, verdicts, termination enums) do so; these
// exceptions cover contract violations that have no sensible return value.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OutOfInjectivityBall : Error { using Error::Error; };
struct SingularDerivative : Error { using Error::Error; };
struct DegenerateRadius : Error { using Error::Error; };
struct NotAZero : Error { using Error::Error; };
struct MissingRoot : Error { using Error::Error; };
struct UnknownProblem : Error { using Error::Error; };
struct NotSymmetric : Error { using Error::Error; };
struct SingularInput : Error { using Error::Error; };
struct JetDivergence : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace riemalpha
