#pragma once

#include <stdexcept>
#include <string>

namespace hotelling {

// Bad arguments: dimension mismatches, out-of-range parameters, malformed configs.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numeric estimate failed to reach its tolerance.
class EstimationError : public std::runtime_error {
public:
    EstimationError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// Run-config problems: unknown keys, missing blocks, wrong types or ranges.
class ConfigError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class UnsupportedCase : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Non-finite gradient during the dynamics.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hotelling
