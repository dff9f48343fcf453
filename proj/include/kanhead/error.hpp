#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kanhead {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A scalar argument is outside its domain (zero fan-in, non-positive radius, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// An object was used out of protocol order, e.g. backward before forward.
class StateError : public Error {
public:
    using Error::Error;
};

/// Bad experiment configuration. The CLI maps this to exit code 1.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Anything wrong with input data. The CLI maps this family to exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class FormatError : public DataError {
public:
    using DataError::DataError;
};

class LookupError : public DataError {
public:
    using DataError::DataError;
};

class SplitError : public DataError {
public:
    using DataError::DataError;
};

} // namespace kanhead
