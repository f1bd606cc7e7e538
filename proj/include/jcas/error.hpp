// Error taxonomy shared by the whole library.
#pragma once

#include <stdexcept>
#include <string>

namespace jcas {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user-facing configuration (config file, CLI arguments, file formats).
struct ConfigError : Error {
    using Error::Error;
};

// Violated mathematical precondition or argument contract.
struct DomainError : Error {
    using Error::Error;
};

// An iterative method failed to reach its tolerance, or a result left its
// admissible range (NaN/Inf, residual above cap).
struct NumericalError : Error {
    using Error::Error;
};

// An estimator cannot produce a meaningful value (degenerate input).
struct EstimationError : Error {
    using Error::Error;
};

// Training-loop failure (divergence, non-finite gradients).
struct TrainingError : Error {
    using Error::Error;
};

} // namespace jcas
