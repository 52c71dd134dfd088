#pragma once

#include <stdexcept>
#include <string>

namespace memsim {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad input: malformed config, shape mismatch, precondition violated by the caller.
class ValidationError : public Error {
public:
    using Error::Error;
};

// The numbers went wrong: divergence, singular systems, rejected fits.
class NumericalError : public Error {
public:
    using Error::Error;
};

class IntegrationDiverged : public NumericalError {
public:
    IntegrationDiverged(double t, const std::string& what)
        : NumericalError(what), time_(t) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class DomainError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularMatrix : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SaturationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class FitRejected : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class FitBandEmpty : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class AmbiguousPath : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class AmbiguousState : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace memsim
