#pragma once

#include "rmg1/model.hpp"
#include "rmg1/stats.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace rmg1::sim {

/// Which clock drives the arrival rate while the server is busy:
/// lambda0 f(remaining service time) or lambda0 f(elapsed service time).
enum class RateMode { remaining, elapsed };
std::string_view to_string(RateMode mode);
RateMode parse_rate_mode(std::string_view text);

/// State of the process: queue length n, remaining service r (only when n > 0), clock.
struct SimState {
    std::uint64_t n = 0;
    double r = 0.0;
    double clock = 0.0;
};

/// 64-bit stream generator; one per replication.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 step; used to derive decorrelated replication seeds.
std::uint64_t splitmix64(std::uint64_t& state);
/// Seeds for n replications derived from base_seed.
std::vector<std::uint64_t> replication_seeds(std::uint64_t base_seed, std::size_t n);

struct SimOptions {
    double horizon = 1e6;
    std::uint64_t seed = 1;
    RateMode mode = RateMode::remaining;
    /// Negative: max(1% of horizon, 100 nu), capped at half the horizon.
    double warmup = -1.0;
    std::size_t batches = 32;
    std::size_t histogram_bins = 128;  // the last bin collects all larger values
};

double default_warmup(const QueueModel& model, double horizon);

/// Statistics of one run (or of several pooled replications). Counts cover
/// the whole run; estimates and histograms cover [warmup, horizon].
struct SimulationReport {
    double horizon = 0.0;
    double warmup = 0.0;
    std::uint64_t seed = 0;
    RateMode mode = RateMode::remaining;
    std::size_t replications = 1;

    std::uint64_t arrivals = 0;
    std::uint64_t completions = 0;
    std::uint64_t measured_arrivals = 0;
    std::uint64_t measured_completions = 0;
    std::uint64_t final_queue = 0;
    std::uint64_t max_queue = 0;

    stats::Estimate time_avg_queue;
    stats::Estimate empty_fraction;
    stats::Estimate completion_empty_fraction;  // fraction of completions that leave the system empty
    stats::Estimate effective_rate;
    stats::Estimate mean_sojourn;
    stats::Estimate mean_wait;

    std::vector<std::uint64_t> completion_histogram;  // counts of the queue length left behind
    std::vector<double> continuous_histogram;         // fraction of time at each queue length

    // Per-batch normalized histograms, used by the distribution tests.
    std::vector<std::vector<double>> completion_batches;
    std::vector<std::vector<double>> continuous_batches;
};

/// One replication of the event-driven simulation, starting empty.
/// Throws DomainError when horizon <= warmup.
SimulationReport run(const QueueModel& model, const SimOptions& options);

/// First arrival in (0, r0) of a Poisson process with intensity lambda0 f(r0 - t),
/// by thinning against lambda0 sup f; nullopt when service completes first.
std::optional<double> sample_busy_arrival(double r0, const QueueModel& model, Rng& rng);
/// Same, in either mode; sigma is the full service time of the customer in
/// service (elapsed mode evaluates f at sigma - r0 + t).
std::optional<double> sample_busy_arrival(double r0, double sigma, RateMode mode, const QueueModel& model, Rng& rng);

/// Independent replications, run concurrently, with seeds from replication_seeds.
/// Estimates are replication means with between-replication standard errors;
/// counts and histograms are pooled. Throws DomainError when n_reps < 2.
SimulationReport replicate(const QueueModel& model, const SimOptions& options, std::size_t n_reps);
/// Same with explicit seeds (one per replication).
SimulationReport replicate(const QueueModel& model, const SimOptions& options, const std::vector<std::uint64_t>& seeds);

}  // namespace rmg1::sim
