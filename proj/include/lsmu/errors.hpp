#pragma once

#include <stdexcept>
#include <string>

namespace lsmu {

// Error taxonomy shared by the library and the CLI. The CLI maps these to
// exit codes: ConfigError -> 2, NumericError/DomainError/DivergenceError -> 3,
// IoError -> 4.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when the latent pair integral does not converge (encoder variance
// exceeding the prior variance in some dimension). Never clamped internally;
// callers decide how to report or reject.
struct DivergenceError : NumericError {
    explicit DivergenceError(const std::string& msg) : NumericError(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lsmu
