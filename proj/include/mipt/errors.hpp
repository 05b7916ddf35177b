#pragma once

#include <stdexcept>
#include <string>

namespace mipt {

// Invalid configuration or input file (CLI exit code 2).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical diagnostic failure, e.g. non-saturating entropy growth or a
// collapse with no overlapping q windows (CLI exit code 3).
struct DiagnosticError : std::runtime_error {
    explicit DiagnosticError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mipt
