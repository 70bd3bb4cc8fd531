#pragma once

#include <stdexcept>
#include <string>

namespace cq {

/// Dimension mismatch between operands; the message names both shapes.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Invalid configuration value (bit width, percentile, step size, ...).
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Numerical failure (non-finite result, iteration cap exceeded, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed file content or I/O failure.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cq
