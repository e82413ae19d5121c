#pragma once

#include <stdexcept>
#include <string>

namespace pimc_ho {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures (CLI maps these to exit code 3).
struct NumericalError : Error {
    using Error::Error;
};

struct DivisionBySingularSeries : NumericalError {
    using NumericalError::NumericalError;
};

struct NegativeLeadingTerm : NumericalError {
    using NumericalError::NumericalError;
};

struct ContractionSingularity : NumericalError {
    using NumericalError::NumericalError;
};

struct NonPalindromicSequence : NumericalError {
    using NumericalError::NumericalError;
};

struct SubunityZeta : NumericalError {
    using NumericalError::NumericalError;
};

struct TruncationTooShallow : NumericalError {
    using NumericalError::NumericalError;
};

struct WindowEmpty : NumericalError {
    using NumericalError::NumericalError;
};

struct ParameterOutOfRange : NumericalError {
    using NumericalError::NumericalError;
};

struct NonConvergence : NumericalError {
    using NumericalError::NumericalError;
};

struct NonIntegrableKernel : NumericalError {
    using NumericalError::NumericalError;
};

struct GridTooCoarse : NumericalError {
    using NumericalError::NumericalError;
};

// Malformed input files / CLI arguments (exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

} // namespace pimc_ho
