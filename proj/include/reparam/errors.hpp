#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace reparam {

// Argument outside the (open) domain of a map.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Array lengths / trailing dimensions that do not fit.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotPositiveDefinite : DomainError {
    std::size_t minor;
    explicit NotPositiveDefinite(std::size_t index)
        : DomainError("matrix is not positive definite (leading minor " + std::to_string(index) + ")"),
          minor(index) {}
};

struct SingularMatrix : DomainError {
    using DomainError::DomainError;
};

struct ParseError : std::invalid_argument {
    std::size_t position;
    ParseError(const std::string& msg, std::size_t pos)
        : std::invalid_argument("parse error at position " + std::to_string(pos) + ": " + msg), position(pos) {}
};

// Well-formed spec text with invalid arguments (b <= a, dim 0, ...).
struct SpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace reparam
