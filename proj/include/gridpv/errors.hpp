#pragma once

#include <stdexcept>
#include <string>

namespace gridpv {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Both sequence magnitudes vanished: total loss of grid voltage.
class DegenerateVoltage : public Error {
public:
    using Error::Error;
};

/// |u+|^2 - |u-|^2 collapsed below the guard; the constant-P references are undefined.
class SequenceSingularity : public Error {
public:
    using Error::Error;
};

class EnvelopeSingularity : public Error {
public:
    using Error::Error;
};

/// A plant state left its sanity bounds.
class NumericalBlowup : public Error {
public:
    using Error::Error;
};

class WindowTooShort : public Error {
public:
    using Error::Error;
};

/// Scenario parse or schema error. `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
public:
    ConfigError(const std::string& message, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
          line_(line)
    {
    }

    int line() const noexcept { return line_; }

private:
    int line_;
};

} // namespace gridpv
