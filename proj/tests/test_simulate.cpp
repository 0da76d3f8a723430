#include "rmg1/continuous.hpp"
#include "rmg1/embedded.hpp"
#include "rmg1/errors.hpp"
#include "rmg1/simulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace rmg1;
using namespace rmg1::sim;

namespace {

const auto kUnit = ServiceDistribution::uniform(0.0, 1.0);

QueueModel increasing(double lambda0) { return QueueModel(lambda0, ReshapeFunction::linear(0.0, 3.0, 1.0), kUnit); }
QueueModel mm1(double lambda0) {
    return QueueModel(lambda0, ReshapeFunction::constant(), ServiceDistribution::exponential(1.0));
}

SimOptions opts(double horizon, std::uint64_t seed) {
    SimOptions o;
    o.horizon = horizon;
    o.seed = seed;
    return o;
}

}  // namespace

TEST_CASE("rate mode parsing") {
    CHECK(parse_rate_mode("remaining") == RateMode::remaining);
    CHECK(parse_rate_mode("elapsed") == RateMode::elapsed);
    CHECK(to_string(RateMode::elapsed) == "elapsed");
    CHECK_THROWS_AS(parse_rate_mode("age"), ConfigError);
}

TEST_CASE("replication seeds are distinct and reproducible") {
    const auto a = replication_seeds(9, 16);
    CHECK(a == replication_seeds(9, 16));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) CHECK(a[i] != a[j]);
    CHECK(replication_seeds(10, 1)[0] != a[0]);
}

TEST_CASE("thinning sampler") {
    Rng rng(123);
    // f = 1, lambda0 = 1, r0 = 1: no arrival with probability e^-1.
    const auto plain = mm1(1.0);
    int none = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i)
        if (!sample_busy_arrival(1.0, plain, rng)) ++none;
    const double p = std::exp(-1.0);
    CHECK(std::abs(none / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));

    // f = 3r on [0, 1], lambda0 = 1, r0 = 1: the arrival count over the service
    // is Poisson(1.5), so the first-arrival miss probability is e^-1.5.
    const auto inc = increasing(1.0);
    none = 0;
    double first_sum = 0.0;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        const auto t = sample_busy_arrival(1.0, inc, rng);
        if (!t) {
            ++none;
            continue;
        }
        CHECK(*t > 0.0);
        CHECK(*t < 1.0);
        first_sum += *t;
        ++hits;
    }
    const double q = std::exp(-1.5);
    CHECK(std::abs(none / double(n) - q) < 4.0 * std::sqrt(q * (1 - q) / n));
    // The intensity 3 (1 - t) favours early arrivals.
    CHECK(first_sum / hits < 0.5);

    // Elapsed mode with sigma = r0 = 1: intensity 3t, same miss probability.
    none = 0;
    for (int i = 0; i < n; ++i)
        if (!sample_busy_arrival(1.0, 1.0, RateMode::elapsed, inc, rng)) ++none;
    CHECK(std::abs(none / double(n) - q) < 4.0 * std::sqrt(q * (1 - q) / n));
}

TEST_CASE("no arrivals during service") {
    const QueueModel m(0.8, ReshapeFunction::constant(0.0), kUnit);
    const auto rep = run(m, opts(1e5, 4));
    CHECK(rep.max_queue == 1);
    CHECK(rep.arrivals > 0);
}

TEST_CASE("M/M/1 estimates") {
    const auto m = mm1(0.5);
    const auto rep = run(m, opts(1e6, 11));
    CHECK(rep.empty_fraction.value == doctest::Approx(0.5).epsilon(0.02));
    CHECK(rep.empty_fraction.covers(0.5, 4.0));
    CHECK(rep.time_avg_queue.covers(1.0, 4.0));
    CHECK(rep.mean_sojourn.covers(2.0, 4.0));
    CHECK(rep.mean_wait.covers(1.0, 4.0));
    CHECK(rep.effective_rate.covers(0.5, 4.0));
    CHECK(rep.completion_empty_fraction.covers(0.5, 4.0));
}

TEST_CASE("reshaped arrival rate") {
    const auto m = increasing(0.7);
    const auto rep = run(m, opts(1e6, 17));
    CHECK(rep.effective_rate.value == doctest::Approx(0.7).epsilon(0.015));
    CHECK(rep.empty_fraction.covers(empty_probability(m), 4.0));
    CHECK(rep.time_avg_queue.covers(mean_queue_length(m), 4.0));
}

TEST_CASE("runs are deterministic in the seed") {
    const auto m = increasing(0.8);
    const auto a = run(m, opts(2e4, 5));
    const auto b = run(m, opts(2e4, 5));
    const auto c = run(m, opts(2e4, 6));
    CHECK(a.arrivals == b.arrivals);
    CHECK(a.completion_histogram == b.completion_histogram);
    CHECK(a.time_avg_queue.value == b.time_avg_queue.value);
    CHECK(a.arrivals != c.arrivals);

    const std::vector<std::uint64_t> seeds{1, 1};
    const auto twin = replicate(m, opts(2e4, 0), seeds);
    CHECK(twin.time_avg_queue.std_error == 0.0);
    CHECK(twin.replications == 2);
}

TEST_CASE("replications") {
    const auto rep = replicate(mm1(0.5), opts(1e5, 3), 8);
    CHECK(rep.replications == 8);
    CHECK(rep.time_avg_queue.samples == 8);
    CHECK(rep.time_avg_queue.value == doctest::Approx(1.0).epsilon(0.05));
    CHECK_THROWS_AS(replicate(mm1(0.5), opts(1e5, 3), 1), DomainError);
}

TEST_CASE("flow conservation and bookkeeping") {
    const auto rep = run(increasing(0.9), opts(1e5, 21));
    CHECK(rep.arrivals == rep.completions + rep.final_queue);
    CHECK(rep.measured_completions <= rep.completions);
    std::uint64_t hist = 0;
    for (auto c : rep.completion_histogram) hist += c;
    CHECK(hist == rep.measured_completions);
    double time_mass = 0.0;
    for (double x : rep.continuous_histogram) time_mass += x;
    CHECK(time_mass == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.completion_batches.size() == 32);

    SimOptions bad = opts(100.0, 1);
    bad.warmup = 100.0;
    CHECK_THROWS_AS(run(increasing(0.9), bad), DomainError);
}

TEST_CASE("the clock that drives the rate matters") {
    const auto m = increasing(0.8);
    SimOptions el = opts(5e5, 8);
    el.mode = RateMode::elapsed;
    const auto rem = run(m, opts(5e5, 8));
    const auto ela = run(m, el);
    // Completions see the same embedded law either way, by symmetry of the arrival count.
    CHECK(stats::histogram_test(rem.completion_batches, ela.completion_batches).p_value > 1e-4);
    CHECK(stats::histogram_test(rem.continuous_batches, ela.continuous_batches).p_value < 1e-6);
}

TEST_CASE("time-changed model matches on completions") {
    const QueueModel m(0.8, ReshapeFunction::linear(0.5, 3.0, 1.0, 3.5), kUnit);
    const auto a = run(m, opts(5e5, 12));
    const auto b = run(time_changed_model(m), opts(5e5, 13));
    CHECK(stats::histogram_test(a.completion_batches, b.completion_batches).p_value > 1e-4);
    const auto q = solve_embedded(m).q;
    CHECK(stats::histogram_test(a.completion_batches, q).p_value > 1e-4);
}

TEST_CASE("unstable models still simulate") {
    const auto rep = run(mm1(1.5), opts(1e4, 2));
    CHECK(rep.final_queue > 1000);
}
