#pragma once

#include <stdexcept>
#include <string>

namespace rmg1 {

/// Argument outside the domain of an operation (negative time, bad bracket, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A quadrature or solver failed to reach its tolerance.
class NumericsError : public std::runtime_error {
public:
    NumericsError(const std::string& what, double estimate, double error)
        : std::runtime_error(what), estimate_(estimate), error_(error) {}
    explicit NumericsError(const std::string& what) : NumericsError(what, 0.0, 0.0) {}

    double estimate() const noexcept { return estimate_; }
    double error() const noexcept { return error_; }

private:
    double estimate_;
    double error_;
};

/// rho = lambda0 * nu_bar >= 1, so no stationary distribution exists.
class InstabilityError : public std::runtime_error {
public:
    explicit InstabilityError(double rho);
    double rho() const noexcept { return rho_; }

private:
    double rho_;
};

/// The cumulative reshape F cannot be inverted where it was asked to be.
class NotInvertibleError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Malformed model spec or inconsistent configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace rmg1
