#include "rmg1/closed_forms.hpp"
#include "rmg1/continuous.hpp"
#include "rmg1/embedded.hpp"
#include "rmg1/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace rmg1;

namespace {

const auto kUnit = ServiceDistribution::uniform(0.0, 1.0);

QueueModel increasing(double lambda0) { return QueueModel(lambda0, ReshapeFunction::linear(0.0, 3.0, 1.0), kUnit); }
QueueModel decreasing(double lambda0) { return QueueModel(lambda0, ReshapeFunction::linear(1.5, -1.5, 1.0), kUnit); }
QueueModel constant(double lambda0) { return QueueModel(lambda0, ReshapeFunction::constant(), kUnit); }
QueueModel mm1(double lambda0) {
    return QueueModel(lambda0, ReshapeFunction::constant(), ServiceDistribution::exponential(1.0));
}
QueueModel window(double t, double lambda0) {
    return QueueModel(lambda0, ReshapeFunction::window(t), ServiceDistribution::exponential(1.0));
}

}  // namespace

TEST_CASE("M/M/1 metrics") {
    const auto m = mm1(0.5);
    CHECK(empty_probability(m) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(mean_queue_length(m) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(waiting_time(m) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sojourn_time(m) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(arrival_rate(m) == doctest::Approx(0.5).epsilon(1e-14));

    const auto sol = solve_densities(m);
    const auto marg = marginal_distribution(sol);
    for (std::size_t k = 0; k < 8; ++k) CHECK(marg[k] == doctest::Approx(std::pow(0.5, k + 1)).epsilon(1e-8));
    CHECK(solution_mean_queue_length(sol) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("marginal law against the ODE route") {
    const auto m = increasing(0.8);
    const auto sol = solve_densities(m);
    const auto marg = marginal_distribution(sol);
    REQUIRE(marg.size() > 4);
    CHECK(marg[0] == doctest::Approx(0.6).epsilon(1e-10));
    CHECK(marg[1] == doctest::Approx(0.2366772392).epsilon(1e-8));
    CHECK(marg[2] == doctest::Approx(0.1023527834).epsilon(1e-8));
    CHECK(marg[3] == doctest::Approx(0.03979718411).epsilon(1e-7));
    CHECK(mean_queue_length(m) == doctest::Approx(0.656).epsilon(1e-12));
    CHECK(solution_mean_queue_length(sol) == doctest::Approx(0.656).epsilon(1e-7));
    CHECK(std::accumulate(marg.begin(), marg.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("density invariants") {
    const std::vector<QueueModel> models{increasing(0.8), decreasing(1.0), window(3.0, 0.7), mm1(0.9),
                                         QueueModel(0.4, ReshapeFunction::window(1.0, 2.0), kUnit)};
    for (const auto& m : models) {
        const auto sol = solve_densities(m);
        const auto& d = sol.diagnostics;
        CHECK(d.converged);
        CHECK(d.s_identity < 1e-6);
        CHECK(d.boundary < 1e-8);
        CHECK(d.flux_identity < 1e-8);
        CHECK(d.balance < 1e-4 * m.lambda0());
        CHECK(sol.mu_total == doctest::Approx(total_mass(m)).epsilon(1e-8));
        CHECK(std::accumulate(sol.m0.begin(), sol.m0.end(), 0.0) == doctest::Approx(m.lambda0()).epsilon(1e-8));
        CHECK(solution_mean_queue_length(sol) == doctest::Approx(mean_queue_length(m)).epsilon(1e-6));
        for (const auto& level : sol.m)
            for (double v : level) CHECK(v >= 0.0);
    }
}

TEST_CASE("Little's law and arrival rate") {
    for (const auto& m : {increasing(0.8), decreasing(1.2), window(3.0, 0.7)}) {
        CHECK(mean_queue_length(m) == doctest::Approx(arrival_rate(m) * sojourn_time(m)).epsilon(1e-12));
        CHECK(sojourn_time(m) == doctest::Approx(waiting_time(m) + m.nu()).epsilon(1e-12));
    }
    const QueueModel ind(0.4, ReshapeFunction::window(1.0, 2.0), kUnit);
    CHECK(arrival_rate(ind) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(empty_probability(ind) == doctest::Approx(0.75).epsilon(1e-12));
    const auto sol = solve_densities(ind);
    CHECK(empty_probability(sol, ind) == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("closed forms for the waiting time") {
    for (double l : {0.2, 0.6, 1.0, 1.2}) {
        CHECK(waiting_time(decreasing(l)) == doctest::Approx(closed_form::uniform_decreasing_wait(l)).epsilon(1e-12));
        CHECK(waiting_time(constant(l)) == doctest::Approx(closed_form::uniform_constant_wait(l)).epsilon(1e-12));
        CHECK(waiting_time(increasing(l)) == doctest::Approx(closed_form::uniform_increasing_wait(l)).epsilon(1e-12));
    }
    CHECK(waiting_time(window(3.0, 0.7)) == doctest::Approx(2.0386910813439877).epsilon(1e-12));
    CHECK(closed_form::window_exponential_wait(3.0, 0.7) == doctest::Approx(2.0386910813439877).epsilon(1e-14));
    CHECK(closed_form::window_exponential_wait_reference(3.0, 0.7) ==
          doctest::Approx(1.6040744681513002).epsilon(1e-14));
    // t = inf is plain M/M/1.
    CHECK(closed_form::window_exponential_wait(INFINITY, 0.5) == doctest::Approx(1.0));
    for (double t : {0.5, 1.0, 2.0, 5.0})
        CHECK(waiting_time(window(t, 0.6)) == doctest::Approx(closed_form::window_exponential_wait(t, 0.6)).epsilon(1e-11));
    CHECK(solve_embedded(constant(1.0)).mean_completions == doctest::Approx(5.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("time change preserves level masses") {
    const QueueModel m(0.8, ReshapeFunction::linear(0.5, 3.0, 1.0, 3.5), kUnit);
    const auto sol = solve_densities(m);
    const auto tc = time_changed_model(m);
    const auto embedded = solve_embedded(tc);
    const auto weighted = weighted_level_masses(sol, m);
    const auto plain = level_masses(solve_densities(tc));
    for (std::size_t k = 1; k <= 6; ++k) {
        CHECK(weighted[k - 1] == doctest::Approx(embedded.q[k]).epsilon(1e-8));
        CHECK(plain[k - 1] == doctest::Approx(weighted[k - 1]).epsilon(1e-6));
    }
}

TEST_CASE("degenerate and unstable inputs") {
    const auto idle = solve_densities(mm1(0.0));
    CHECK(idle.mu_atom == 1.0);
    CHECK(idle.levels == 0);
    CHECK(empty_probability(mm1(0.0)) == 1.0);
    CHECK_THROWS_AS(solve_densities(mm1(1.0)), InstabilityError);
    CHECK_THROWS_AS(waiting_time(increasing(2.0)), InstabilityError);
}
