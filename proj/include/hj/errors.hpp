#pragma once

#include <stdexcept>
#include <string>

namespace hj {

/// Base class for every error raised by the solver stack.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A configuration key is missing, malformed or out of range.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& what)
        : Error("config key '" + key + "': " + what), key_(std::move(key)) {}

    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// The scalar Caratheodory ODE left the representable range.
class DivergenceError : public Error {
public:
    DivergenceError(double time, double value)
        : Error("Caratheodory solution diverged at s=" + std::to_string(time) +
                " (u=" + std::to_string(value) + ")"),
          time_(time), value_(value) {}

    [[nodiscard]] double time() const noexcept { return time_; }
    [[nodiscard]] double value() const noexcept { return value_; }

private:
    double time_;
    double value_;
};

/// An iterative solve stopped without meeting its tolerance. `residual` is the
/// last (or worst) residual, `diagnostics` a JSON document for reporting.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual, std::string diagnostics = "{}")
        : Error(what), residual_(residual), diagnostics_(std::move(diagnostics)) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }
    [[nodiscard]] const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    double residual_;
    std::string diagnostics_;
};

}  // namespace hj
