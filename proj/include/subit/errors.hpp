#pragma once

#include <stdexcept>
#include <string>

namespace subit {

// Domain errors map to CLI exit code 2, IO errors to 3.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PlacementInfeasible : DomainError {
    using DomainError::DomainError;
};

struct InfeasibleTarget : DomainError {
    using DomainError::DomainError;
};

struct HoleDetected : DomainError {
    using DomainError::DomainError;
};

struct NonConvergence : DomainError {
    using DomainError::DomainError;
};

struct OutOfBounds : DomainError {
    using DomainError::DomainError;
};

struct ShapeMismatch : DomainError {
    using DomainError::DomainError;
};

struct SpecMismatch : DomainError {
    using DomainError::DomainError;
};

struct Divergence : DomainError {
    using DomainError::DomainError;
};

struct EmptyClass : DomainError {
    using DomainError::DomainError;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ManifestCorrupt : IoError {
    using IoError::IoError;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace subit
