#include "rmg1/continuous.hpp"

#include "rmg1/errors.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

namespace rmg1 {

namespace {

void require_stable(const QueueModel& model) {
    if (!model.stable()) throw InstabilityError(model.rho());
}

// Keeps retained densities strictly positive.
void flush_tiny(std::vector<double>& v) {
    for (double& x : v)
        if (x < 1e-300) x = DBL_MIN;
}

std::vector<double> product(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

ContinuousSolution solve_on_grid(const QueueModel& model, const EmbeddedSolution& embedded,
                                 const numerics::Grid& grid) {
    require_stable(model);
    ContinuousSolution sol{grid, {}, {}, 1.0 - model.rho(), 1.0, 0, {}};
    const double lambda = model.lambda0();
    if (lambda == 0.0) {
        sol.mu_atom = 1.0;
        sol.mu_total = 1.0;
        return sol;
    }

    const auto& reshape = model.reshape();
    const auto& service = model.service();
    const auto phi = grid.sample([&](double r) { return lambda * reshape.integral(r); });
    const auto f = grid.sample([&](double r) { return reshape(r); });
    const auto g = grid.sample([&](double r) { return service.pdf(r); });
    const auto G = grid.sample([&](double r) { return service.tail(r); });

    const auto A = grid.discounted_tail(g, phi);
    const double a0 = A.front();
    if (!(a0 > 0.0)) throw NumericsError("solve_densities: no service completes without an arrival");

    const std::size_t levels = embedded.truncation + 1;
    sol.levels = levels;
    sol.m0.push_back(lambda * sol.mu_atom);

    auto& diag = sol.diagnostics;
    std::vector<double> B(A.size());
    for (std::size_t i = 0; i < A.size(); ++i) B[i] = lambda * sol.mu_atom * A[i];

    for (std::size_t k = 1; k <= levels; ++k) {
        const double next = lambda * grid.integral(product(f, B)) / a0;
        sol.m0.push_back(next);

        std::vector<double> mk(A.size());
        for (std::size_t i = 0; i < A.size(); ++i) mk[i] = next * A[i] + B[i];
        flush_tiny(mk);

        diag.boundary_recursion = std::max(diag.boundary_recursion, std::abs(mk.front() - sol.m0[k - 1]) / lambda);
        const auto fm = product(f, mk);
        diag.flux_identity = std::max(diag.flux_identity, std::abs(next - lambda * grid.integral(fm)) / lambda);

        B = grid.discounted_tail(fm, phi);
        for (double& x : B) x *= lambda;
        sol.m.push_back(std::move(mk));
    }

    for (std::size_t k = 0; k < sol.m0.size() && k < embedded.q.size(); ++k)
        diag.boundary = std::max(diag.boundary, std::abs(sol.m0[k] - lambda * embedded.q[k]));

    numerics::CompensatedSum busy;
    for (const auto& mk : sol.m) busy.add(grid.integral(mk));
    sol.mu_total = sol.mu_atom + busy.value();

    for (std::size_t i = 0; i < G.size(); ++i) {
        numerics::CompensatedSum s;
        for (const auto& mk : sol.m) s.add(mk[i]);
        diag.s_identity = std::max(diag.s_identity, std::abs(s.value() - lambda * G[i]) / lambda);
    }

    // d/dr m(k) = lambda0 f (m(k) - m(k-1)) - (m(k+1, 0) + [k = 1] lambda0 mu_atom) g.
    for (std::size_t k = 1; k <= levels; ++k) {
        const auto& mk = sol.m[k - 1];
        const auto dm = grid.derivative(mk);
        const double source = sol.m0[k] + (k == 1 ? lambda * sol.mu_atom : 0.0);
        for (std::size_t i = 0; i < mk.size(); ++i) {
            if (!grid.interior(i)) continue;
            const double below = k >= 2 ? sol.m[k - 2][i] : 0.0;
            const double residual = dm[i] - lambda * f[i] * (mk[i] - below) + source * g[i];
            diag.balance = std::max(diag.balance, std::abs(residual));
        }
    }
    return sol;
}

}  // namespace

numerics::Grid default_grid(const QueueModel& model, const DensityOptions& options) {
    const double r_max = model.service().r_max();
    double width = r_max / std::max(1, options.initial_elements);
    const double peak_rate = model.lambda0() * model.reshape().sup();
    if (peak_rate > 0.0) width = std::min(width, 4.0 / peak_rate);
    const auto bps = model.breakpoints();
    return numerics::Grid::build(bps, r_max, width, options.order);
}

ContinuousSolution solve_densities(const QueueModel& model, const EmbeddedSolution& embedded,
                                   const numerics::Grid& grid) {
    return solve_on_grid(model, embedded, grid);
}

ContinuousSolution solve_densities(const QueueModel& model, const numerics::Grid& grid, double eps_tail) {
    require_stable(model);
    return solve_on_grid(model, solve_embedded(model, eps_tail), grid);
}

ContinuousSolution solve_densities(const QueueModel& model, const EmbeddedSolution& embedded,
                                   const DensityOptions& options) {
    auto grid = default_grid(model, options);
    auto sol = solve_on_grid(model, embedded, grid);
    std::size_t refinements = 0;
    while (sol.diagnostics.s_identity > options.s_tolerance &&
           refinements < static_cast<std::size_t>(std::max(0, options.max_refinements))) {
        grid = grid.refined();
        ++refinements;
        sol = solve_on_grid(model, embedded, grid);
    }
    sol.diagnostics.refinements = refinements;
    sol.diagnostics.converged = sol.diagnostics.s_identity <= options.s_tolerance;
    return sol;
}

ContinuousSolution solve_densities(const QueueModel& model, const DensityOptions& options) {
    require_stable(model);
    return solve_densities(model, solve_embedded(model, options.eps_tail), options);
}

double total_mass(const QueueModel& model) {
    return 1.0 - model.rho() + model.lambda0() * model.nu();
}

double empty_probability(const QueueModel& model) {
    require_stable(model);
    return (1.0 - model.rho()) / total_mass(model);
}

double empty_probability(const ContinuousSolution&, const QueueModel& model) {
    return empty_probability(model);
}

double mean_queue_length(const QueueModel& model) {
    require_stable(model);
    const double lambda = model.lambda0();
    if (lambda == 0.0) return 0.0;
    const double eq = mean_at_completions(model);
    return (lambda * waiting_first_term(model) + (1.0 - model.rho() + eq) * lambda * model.nu()) / total_mass(model);
}

double mean_queue_length(const ContinuousSolution&, const QueueModel& model) {
    return mean_queue_length(model);
}

double arrival_rate(const QueueModel& model) {
    require_stable(model);
    return model.lambda0() / total_mass(model);
}

double waiting_time(const QueueModel& model) {
    require_stable(model);
    if (model.lambda0() == 0.0) return 0.0;
    return waiting_first_term(model) + (mean_at_completions(model) - model.rho()) * model.nu();
}

double sojourn_time(const QueueModel& model) {
    return waiting_time(model) + model.nu();
}

std::vector<double> level_masses(const ContinuousSolution& sol) {
    std::vector<double> out;
    out.reserve(sol.m.size());
    for (const auto& mk : sol.m) out.push_back(sol.grid.integral(mk));
    return out;
}

std::vector<double> weighted_level_masses(const ContinuousSolution& sol, const QueueModel& model) {
    const auto f = sol.grid.sample([&](double r) { return model.reshape()(r); });
    std::vector<double> out;
    out.reserve(sol.m.size());
    for (const auto& mk : sol.m) out.push_back(sol.grid.integral(product(f, mk)));
    return out;
}

std::vector<double> marginal_distribution(const ContinuousSolution& sol) {
    std::vector<double> out{sol.mu_atom / sol.mu_total};
    for (double mass : level_masses(sol)) out.push_back(mass / sol.mu_total);
    return out;
}

double solution_mean_queue_length(const ContinuousSolution& sol) {
    std::vector<double> phi(sol.grid.size(), 0.0);
    for (std::size_t k = 0; k < sol.m.size(); ++k)
        for (std::size_t i = 0; i < phi.size(); ++i) phi[i] += static_cast<double>(k + 1) * sol.m[k][i];
    return sol.grid.integral(phi) / sol.mu_total;
}

}  // namespace rmg1
