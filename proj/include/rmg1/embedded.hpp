#pragma once

#include "rmg1/model.hpp"

#include <cstddef>
#include <vector>

namespace rmg1 {

/// Law of the number of arrivals during one service:
/// p(j) = int Poisson(j; lambda0 F(r)) g(r) dr, j = 0..J.
struct IncrementPmf {
    std::vector<double> p;
    std::size_t truncation = 0;  // J
    double tail_mass = 0.0;      // P(more than J arrivals), integrated independently of p

    double tail_above(std::size_t j) const;  // p_bar(j) = sum_{i > j} p(i), tail_mass included
};

/// Stationary law of the queue length just after service completions.
struct EmbeddedSolution {
    std::vector<double> q;  // q[0..K]
    double rho = 0.0;
    double mean_completions = 0.0;  // Pollaczek-Khinchine mean
    std::size_t truncation = 0;     // K
    double tail_estimate = 0.0;     // geometric extrapolation of sum_{k > K} q(k)
};

inline constexpr double kDefaultEpsTail = 1e-10;

IncrementPmf increment_pmf(const QueueModel& model, double eps_tail = kDefaultEpsTail);

/// Level-crossing form of the stationary recursion,
///   p(0) q(j) = q(0) p_bar(j-1) + sum_{i=1}^{j-1} q(i) p_bar(j-i),
/// anchored at q(0) = 1 - rho. Throws InstabilityError when rho >= 1.
EmbeddedSolution stationary_q(const IncrementPmf& pmf, const QueueModel& model, double eps_tail = kDefaultEpsTail);

/// Convenience: increment_pmf followed by stationary_q.
EmbeddedSolution solve_embedded(const QueueModel& model, double eps_tail = kDefaultEpsTail);

/// rho + lambda0^2 E[F(sigma)^2] / (2 (1 - rho)).
double mean_at_completions(const QueueModel& model);

/// E_q[exp(s N)], summed over k >= 0. Uses the probability generating function
/// at z = e^s with the increment transform E[exp(-lambda0 (1 - z) F(sigma))].
/// Throws DomainError when the transform diverges or the denominator vanishes.
double stationary_mgf(const QueueModel& model, double s);

/// max_j |q(j) - (qM)(j)| over j <= K, M the banded transition matrix
/// (row 0 equals row 1, row i >= 1 is p shifted right by i - 1).
double balance_residual(const EmbeddedSolution& sol, const IncrementPmf& pmf);

}  // namespace rmg1
