#pragma once

#include "rmg1/embedded.hpp"
#include "rmg1/model.hpp"
#include "rmg1/numerics.hpp"

#include <cstddef>
#include <vector>

namespace rmg1 {

/// Accuracy checks computed alongside the densities. All are absolute.
struct DensityDiagnostics {
    double s_identity = 0.0;          // max_r |sum_k m(k,r) - lambda0 G(r)| / lambda0
    double boundary = 0.0;            // max_k |m(k,0) - lambda0 q(k-1)|
    double flux_identity = 0.0;       // max_k |m(k+1,0) - lambda0 int f m(k)| / lambda0
    double boundary_recursion = 0.0;  // max_k |m(k,.) at r=0 - m(k,0)| / lambda0
    double balance = 0.0;             // max over interior nodes of the balance-equation residual
    std::size_t refinements = 0;
    bool converged = true;
};

/// Continuous-time stationary measure: atom mu_atom at the empty state and
/// densities m(k, r) on busy level k >= 1, sampled on a shared grid.
struct ContinuousSolution {
    numerics::Grid grid;
    std::vector<std::vector<double>> m;  // m[k-1][i] = m(k, r_i), k = 1..levels
    std::vector<double> m0;              // m0[k-1] = m(k, 0), k = 1..levels+1
    double mu_atom = 1.0;
    double mu_total = 1.0;
    std::size_t levels = 0;
    DensityDiagnostics diagnostics;
};

struct DensityOptions {
    int order = 16;
    int initial_elements = 8;
    double s_tolerance = 1e-6;  // refinement stops once the S-identity residual is below this
    int max_refinements = 6;
    double eps_tail = kDefaultEpsTail;
};

/// Solves the balance equations level by level on `grid`, with the level
/// count taken from the embedded solution. Each level is
///   m(k, r) = m(k+1, 0) A(r) + B_k(r),
///   A(r) = int_r exp(-lambda0 (F(u) - F(r))) g(u) du,
///   B_1 = lambda0 mu_atom A,  B_k = lambda0 int_r exp(-lambda0 (F(u) - F(r))) f(u) m(k-1, u) du,
/// and the boundary value comes from the flux identity m(k+1, 0) = lambda0 int f m(k),
/// which involves only positive terms.
/// Throws InstabilityError when rho >= 1.
ContinuousSolution solve_densities(const QueueModel& model, const numerics::Grid& grid,
                                   double eps_tail = kDefaultEpsTail);
ContinuousSolution solve_densities(const QueueModel& model, const EmbeddedSolution& embedded,
                                   const numerics::Grid& grid);
/// Picks a grid from the model's breakpoints and refines it until the
/// S-identity residual is below options.s_tolerance.
ContinuousSolution solve_densities(const QueueModel& model, const DensityOptions& options = {});
ContinuousSolution solve_densities(const QueueModel& model, const EmbeddedSolution& embedded,
                                   const DensityOptions& options);

/// Starting grid used by the adaptive solver.
numerics::Grid default_grid(const QueueModel& model, const DensityOptions& options = {});

/// mu(E) = 1 - rho + lambda0 nu.
double total_mass(const QueueModel& model);
/// (1 - rho) / (1 - rho + lambda0 nu).
double empty_probability(const QueueModel& model);
double empty_probability(const ContinuousSolution& sol, const QueueModel& model);
/// (lambda0^2 E[U(sigma)] + (1 - rho + E_q[N]) lambda0 nu) / mu(E).
double mean_queue_length(const QueueModel& model);
double mean_queue_length(const ContinuousSolution& sol, const QueueModel& model);
/// lambda0 / mu(E).
double arrival_rate(const QueueModel& model);
/// lambda0 E[U(sigma)] + (E_q[N] - rho) nu.
double waiting_time(const QueueModel& model);
double sojourn_time(const QueueModel& model);

/// P(N = k) for k = 0..levels.
std::vector<double> marginal_distribution(const ContinuousSolution& sol);
/// int sum_k k m(k, r) dr / mu_total.
double solution_mean_queue_length(const ContinuousSolution& sol);
/// int m(k, r) dr for k = 1..levels (unnormalized).
std::vector<double> level_masses(const ContinuousSolution& sol);
/// int m(k, r) f(r) dr for k = 1..levels; equals q(k).
std::vector<double> weighted_level_masses(const ContinuousSolution& sol, const QueueModel& model);

}  // namespace rmg1
