#pragma once

#include <stdexcept>
#include <string>

namespace mcvd {

/// Invalid argument outside an operation's domain (non-positive time, bad dimensions, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Operation called on an object that is not ready for it (e.g. threshold not set).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// The two conditional count distributions coincide; no decision threshold exists.
class NoThresholdError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No pulse of the requested family fits inside the energy budget.
class InfeasibleBudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An iterative routine failed to converge; `what()` carries the trace.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Experiment configuration problem; `field()` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& msg)
        : std::runtime_error(field.empty() ? msg : field + ": " + msg), field_(std::move(field)), message_(msg) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    std::string field_;
    std::string message_;
};

}  // namespace mcvd
