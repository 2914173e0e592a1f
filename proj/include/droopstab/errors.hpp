#pragma once

#include <stdexcept>
#include <string>

namespace droopstab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed network description: bad bus reference, disconnected graph,
/// dimension mismatch.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// A quantity that must be invertible is not (zero load impedance,
/// singular reduced matrix).
class SingularityError : public Error {
public:
    using Error::Error;
};

/// A modelling assumption the analysis depends on does not hold
/// (heterogeneous filter constants, nu_i >= 0 for the gain bounds).
class AssumptionViolation : public Error {
public:
    using Error::Error;
};

/// A Lyapunov certificate cannot be built (source matrix not Hurwitz,
/// composite quadratic form not positive definite).
class CertificateInfeasible : public Error {
public:
    using Error::Error;
};

/// Two constructions that must agree did not. Signals a bug.
class InternalConsistencyError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

/// Wraps a failure with the pipeline stage that produced it.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace droopstab
