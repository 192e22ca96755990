#pragma once

#include <stdexcept>
#include <string>

namespace dicebench {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct ThresholdOutOfRange : Error {
    using Error::Error;
};

// Thrown by average_masks when the input stack is empty.
struct EmptyStack : Error {
    using Error::Error;
};

struct IoFailure : Error {
    using Error::Error;
};

struct MalformedHeader : Error {
    using Error::Error;
};

struct ValueOutOfRange : Error {
    using Error::Error;
};

struct TooLarge : Error {
    using Error::Error;
};

struct InvalidFraction : Error {
    using Error::Error;
};

struct InvalidRadius : Error {
    using Error::Error;
};

struct SolutionMismatch : Error {
    using Error::Error;
};

struct DegenerateDenominator : Error {
    using Error::Error;
};

struct SourceNotFound : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

} // namespace dicebench
