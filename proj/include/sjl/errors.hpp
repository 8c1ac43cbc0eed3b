#pragma once

#include <stdexcept>
#include <string>

namespace sjl {

// Parameter outside the mathematical domain of a bound (p > 1/2, v < 1/sqrt(n), ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Malformed call: odd order, length mismatch, empty input.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Request too large for exhaustive enumeration.
class ResourceError : public std::length_error {
public:
    using std::length_error::length_error;
};

// Dataset could not be parsed. Carries the 1-based line number when known.
class LoadError : public std::runtime_error {
public:
    LoadError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Numerical solver failed to bracket or converge.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sjl
