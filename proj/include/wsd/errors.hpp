#ifndef WSD_ERRORS_HPP
#define WSD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wsd {

// Invalid configuration or geometry (caught before any computation starts).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dimension mismatch between operands.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input outside the mathematical domain of an operation.
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Factorization failed: rank deficiency, loss of symmetry, non-convergence.
struct FactorizationError : std::runtime_error {
    explicit FactorizationError(const std::string& msg, int index = -1)
        : std::runtime_error(msg), defective_index(index) {}
    int defective_index;  // 1-based index in descending singular-value order, -1 if n/a
};

// The requested decimal precision cannot resolve the operator's conditioning.
struct PrecisionError : std::runtime_error {
    explicit PrecisionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or unreadable container file.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace wsd

#endif
