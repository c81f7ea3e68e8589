#pragma once

#include <stdexcept>
#include <string>

namespace ilwp {

// Every failure raised by the library derives from Error so callers can
// catch the whole family in one place; the CLI maps each kind to an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or truncated container/bitstream content.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A numeric value outside the domain of an operation (NaN, infinity, b <= 0, ...).
class ValueError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration: bit width out of range, mode incompatible with the store.
class ConfigError : public Error {
public:
    using Error::Error;
};

class PredictionError : public Error {
public:
    using Error::Error;
};

class CodingError : public Error {
public:
    using Error::Error;
};

class AnalysisError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace ilwp
