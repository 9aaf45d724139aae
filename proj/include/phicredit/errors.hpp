#pragma once

#include <stdexcept>
#include <string>

namespace phicredit {

/// Malformed input text (quote files, config files).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input that parses but violates a documented invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A CDS quote that no admissible hazard can reprice.
class BootstrapError : public std::runtime_error {
public:
    BootstrapError(const std::string& what, double maturity)
        : std::runtime_error(what), maturity_(maturity) {}
    double maturity() const noexcept { return maturity_; }

private:
    double maturity_;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Non-finite or otherwise unusable floating-point state during a computation.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace phicredit
