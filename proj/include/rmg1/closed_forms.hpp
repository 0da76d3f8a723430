#pragma once

namespace rmg1::closed_form {

/// Waiting times with uniform(0, 1) service, rho = lambda0 / 2.
/// f(r) = (3/4)(2 - 2r) on [0, 1].
double uniform_decreasing_wait(double lambda0);
/// f = 1 (plain M/G/1).
double uniform_constant_wait(double lambda0);
/// f(r) = 3r on [0, 1].
double uniform_increasing_wait(double lambda0);

/// Exponential(1) service with the normalized window f = 1(r < t) / (1 - e^-t), rho = lambda0:
///   lambda0 A / c (1 + lambda0 / (c (1 - lambda0))),  c = 1 - e^-t,  A = 1 - (1 + t) e^-t.
/// t may be +inf.
double window_exponential_wait(double t, double lambda0);
/// The same expression with lambda0^2 in place of lambda0 inside the bracket.
/// Kept as the reference value the simulator is asked to arbitrate against.
double window_exponential_wait_reference(double t, double lambda0);

}  // namespace rmg1::closed_form
