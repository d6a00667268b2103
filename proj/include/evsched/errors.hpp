// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace evsched {

/// Base class of all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Series or matrix dimensions do not match.
class DimensionError : public Error {
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
    using Error::Error;
};

/// A value violates a documented invariant.
class ValidationError : public Error {
    using Error::Error;
};

/// Input text could not be parsed; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, long line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    long line() const noexcept { return line_; }

private:
    long line_;
};

/// Thermal parameters break the convexity condition a*b1 + b2 >= 0.
class NonConvexError : public Error {
    using Error::Error;
};

/// An iterative solver hit its iteration cap before reaching tolerance.
class ConvergenceError : public Error {
    using Error::Error;
};

}  // namespace evsched
