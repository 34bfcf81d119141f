#pragma once

#include <stdexcept>
#include <string>

namespace bve {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A direction was requested from a (near) zero-length vector.
class DegenerateDirection : public Error {
public:
    using Error::Error;
};

/// A covariance could not be factorized or is too badly conditioned to invert.
class SingularCovariance : public Error {
public:
    using Error::Error;
};

class NumericalBreakdown : public Error {
public:
    using Error::Error;
};

class UnknownExperiment : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Bad configuration value; key() names the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error("config key '" + key + "': " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace bve
