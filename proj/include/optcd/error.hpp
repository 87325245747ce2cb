#pragma once

#include <stdexcept>
#include <string>

namespace optcd {

// Base of every error raised by the library. The CLI maps the concrete
// type to a process exit code (see tools/optcd.cpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller supplied an argument outside an operation's precondition.
class InvalidInput : public Error {
public:
    using Error::Error;
};

// A density or likelihood ratio was requested outside the model support.
class DomainError : public Error {
public:
    using Error::Error;
};

// Valid inputs the numerical machinery does not handle (Markov order > 1,
// non-Markov weights, change-point dependent models in the grid solver).
class UnsupportedConfiguration : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

// Config text that does not parse; message is prefixed with "line N:".
class ConfigError : public Error {
public:
    using Error::Error;
};

class MissingArtifact : public Error {
public:
    using Error::Error;
};

// Calibration target outside (E0 v_1, sum_j E0 v_j).
class InfeasibleTarget : public InvalidInput {
public:
    InfeasibleTarget(const std::string& what, double lower, double upper)
        : InvalidInput(what), lower_(lower), upper_(upper) {}
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }

private:
    double lower_;
    double upper_;
};

}  // namespace optcd
