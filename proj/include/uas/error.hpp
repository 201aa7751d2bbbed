#pragma once

#include <stdexcept>
#include <string>

namespace uas {

enum class ErrorKind {
    InvalidModel,
    Synthesis,
    Propagation,
    UndefinedHeading,
    NoPath,
    Planning,
    Contract,
    Numerical,
    Validation,
    Io,
};

const char* to_string(ErrorKind kind);

/// Base exception for every failure raised by the core library. The C API
/// maps `kind()` onto its error codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Scenario validation failure; `field()` is a dotted path such as
/// `agents[2].position`.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& reason)
        : Error(ErrorKind::Validation, field + ": " + reason), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidModel: return "invalid-model";
        case ErrorKind::Synthesis: return "synthesis";
        case ErrorKind::Propagation: return "propagation";
        case ErrorKind::UndefinedHeading: return "undefined-heading";
        case ErrorKind::NoPath: return "no-path";
        case ErrorKind::Planning: return "planning";
        case ErrorKind::Contract: return "contract";
        case ErrorKind::Numerical: return "numerical";
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

}  // namespace uas
