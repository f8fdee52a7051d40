#pragma once

#include <stdexcept>
#include <string>

namespace besov {

// Thrown when shapes, sizes or parameter ranges are inconsistent.
struct InvalidInput : std::runtime_error {
    explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a function leaves the admissible domain of a model or link
// (e.g. a diffusion coefficient touching its lower bound).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when a linear solve fails to reach its tolerance.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when an operation is called with a model kind it does not support.
struct UnsupportedModel : std::runtime_error {
    explicit UnsupportedModel(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown on malformed experiment configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace besov
