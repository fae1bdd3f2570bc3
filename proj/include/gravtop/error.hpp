#pragma once

#include <stdexcept>
#include <string>

namespace gravtop {

/// Base class for every error raised by the library. `kind()` is a short
/// stable token used in machine-parsable CLI error lines.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

/// Invalid problem/run configuration (bad sizes, unknown names, selectors
/// that match nothing, ...).
class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "config"; }
};

/// Out-of-domain parameter passed to a numerical kernel.
class ParameterError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "parameter"; }
};

/// Failure of the finite element analysis (singular system, CG stagnation).
class AnalysisError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "analysis"; }
};

/// Failure inside the optimizer (non-finite gradients, broken subproblem).
class OptimizerError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "optimizer"; }
};

} // namespace gravtop
