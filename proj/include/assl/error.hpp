#pragma once

#include <stdexcept>
#include <string>

namespace assl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatch, empty batch, K larger than the pool.
class InputError : public Error {
public:
    using Error::Error;
};

/// Invalid or infeasible configuration, detected before any work starts.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Non-finite loss or parameters during optimization.
class TrainingError : public Error {
public:
    TrainingError(const std::string& what, long step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    long step() const noexcept { return step_; }

private:
    long step_;
};

class TrackerError : public Error {
public:
    using Error::Error;
};

class AcquisitionError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace assl
