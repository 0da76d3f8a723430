#include "rmg1/closed_forms.hpp"

#include <cmath>

namespace rmg1::closed_form {

namespace {

double window_wait(double t, double lambda0, double bracket_power) {
    const double c = std::isinf(t) ? 1.0 : -std::expm1(-t);
    const double a = std::isinf(t) ? 1.0 : 1.0 - (1.0 + t) * std::exp(-t);
    return lambda0 * a / c * (1.0 + std::pow(lambda0, bracket_power) / (c * (1.0 - lambda0)));
}

}  // namespace

double uniform_decreasing_wait(double lambda0) {
    const double rho = lambda0 / 2.0;
    return lambda0 / 8.0 + 3.0 * lambda0 * lambda0 / (40.0 * (1.0 - rho));
}

double uniform_constant_wait(double lambda0) {
    const double rho = lambda0 / 2.0;
    return lambda0 / 6.0 + lambda0 * lambda0 / (12.0 * (1.0 - rho));
}

double uniform_increasing_wait(double lambda0) {
    const double rho = lambda0 / 2.0;
    return lambda0 / 4.0 + 9.0 * lambda0 * lambda0 / (80.0 * (1.0 - rho));
}

double window_exponential_wait(double t, double lambda0) { return window_wait(t, lambda0, 1.0); }

double window_exponential_wait_reference(double t, double lambda0) { return window_wait(t, lambda0, 2.0); }

}  // namespace rmg1::closed_form
