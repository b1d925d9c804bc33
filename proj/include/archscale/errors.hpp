#pragma once

#include <stdexcept>
#include <string>

namespace archscale {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad input: malformed files, out-of-range arguments, violated preconditions.
// Maps to CLI exit code 1.
class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// A numerical procedure failed to converge. Maps to CLI exit code 2.
class ConvergenceError : public Error {
  public:
    explicit ConvergenceError(const std::string& msg) : Error(msg) {}
};

}  // namespace archscale
