#pragma once

#include <stdexcept>
#include <string>

namespace consim {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularBlock final : Error { using Error::Error; };
struct ZeroInDegree final : Error { using Error::Error; };
struct BadRoot final : Error { using Error::Error; };
struct ComplexRoots final : Error { using Error::Error; };
struct NonNegativeRoot final : Error { using Error::Error; };
struct ConstantKind final : Error { using Error::Error; };
struct DegenerateTransform final : Error { using Error::Error; };
struct ZeroTimeConstant final : Error { using Error::Error; };
struct NonFinite final : Error { using Error::Error; };
struct DimensionMismatch final : Error { using Error::Error; };
struct ConfigError final : Error { using Error::Error; };
struct UnsupportedOrder final : Error { using Error::Error; };

}  // namespace consim
