#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace forestinv {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or incomplete configuration (maps to CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input data, I/O failures, shape mismatches (exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

/// A text file could not be parsed. Carries the 1-based line number.
class ParseError : public DataError {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : DataError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Query outside the valid domain of a raster.
class OutOfBoundsError : public DataError {
public:
    using DataError::DataError;
};

/// Numerical breakdown: singular matrices, zero variance, degenerate geometry (exit code 4).
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace forestinv
