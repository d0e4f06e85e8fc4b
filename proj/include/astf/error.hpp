#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace astf {

// Root of every exception the library throws. The CLI maps the subclasses
// onto exit codes (usage 2, data 3, numeric 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor shapes that do not agree for an operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A precondition of an operation was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

// Bad or unreadable input data (files, labels, caches).
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line), message_(what) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t line_;
    std::string message_;
};

// NaN/Inf or another numerical breakdown.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace astf
