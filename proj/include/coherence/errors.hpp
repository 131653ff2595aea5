#pragma once

#include <stdexcept>
#include <string>

namespace coherence {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A matrix or file failed one of the density-matrix invariants.
class InvalidState : public Error {
public:
    InvalidState(std::string invariant, const std::string &detail)
        : Error("invalid state (" + invariant + "): " + detail), invariant_(std::move(invariant)) {}

    const std::string &invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// An enumeration or product dimension exceeded its configured cap.
class CapExceeded : public Error {
public:
    using Error::Error;
};

/// The clique structure computed from a state is not self-consistent,
/// which means the edge tolerance misclassified an entry.
class StructuralInconsistency : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A bound or protocol was requested outside its domain of validity.
class NotApplicable : public Error {
public:
    using Error::Error;
};

} // namespace coherence
