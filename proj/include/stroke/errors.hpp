#pragma once

#include <stdexcept>
#include <string>

namespace stroke {

// Base for all domain errors thrown by the library. The CLI maps these to
// exit code 1; anything else escaping is a bug.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor shape / axis disagreement.
struct DimensionError : Error {
    using Error::Error;
};

// Bad user-facing configuration (negative epochs, pool too large, ...).
struct ConfigError : Error {
    using Error::Error;
};

// Malformed text input (annotation XML, INI files, manifests).
struct ParseError : Error {
    using Error::Error;
};

// Malformed binary container (raw video, checkpoint).
struct FormatError : Error {
    using Error::Error;
};

// Operation called in the wrong order (backward without a forward, ...).
struct StateError : Error {
    using Error::Error;
};

// Filesystem failures.
struct IoError : Error {
    using Error::Error;
};

// Non-finite values where finite ones are required (divergence, bad input).
struct NumericError : Error {
    using Error::Error;
};

} // namespace stroke
