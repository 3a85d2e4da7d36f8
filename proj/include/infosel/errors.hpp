#pragma once

#include <stdexcept>
#include <string>

namespace infosel {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyFamily : Error { using Error::Error; };
struct InvalidWeight : Error { using Error::Error; };
struct NotInFamily : Error { using Error::Error; };
struct ProbabilityOutOfRange : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct NegativeMu : Error { using Error::Error; };
struct NestednessViolated : Error { using Error::Error; };
struct EmptyTest : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct DegenerateRegime : Error { using Error::Error; };
struct InvalidBracket : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct TooFew : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

}  // namespace infosel
