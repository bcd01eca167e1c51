#pragma once

#include <stdexcept>
#include <string>

namespace xbar {

// Base for every diagnostic raised by the library. The CLI maps these to
// exit code 2; anything else escaping is an internal fault (exit code 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Geometry problems: non-integral output dims, channel mismatch.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Out-of-domain numeric parameters (negative variance, eps <= 0, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A weight whose resistance falls outside the programmable window.
class ProgrammabilityError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

/// Missing named tensor.
class LookupError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Internal invariant broken; never a user mistake.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace xbar
