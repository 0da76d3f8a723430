#include "rmg1/simulate.hpp"

#include "rmg1/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <numeric>

namespace rmg1::sim {

namespace {

// max f over [lo, hi); f is piecewise linear, so endpoints and breakpoints suffice.
double local_bound(const ReshapeFunction& f, double lo, double hi) {
    double bound = std::max(f(lo), f(std::max(lo, std::nextafter(hi, lo))));
    for (double x : f.breakpoints()) {
        if (x <= lo || x >= hi) continue;
        bound = std::max({bound, f(x), f(std::nextafter(x, lo))});
    }
    return bound;
}

class Tally {
public:
    Tally(double warmup, double horizon, std::size_t batches, std::size_t bins)
        : warmup_(warmup),
          length_((horizon - warmup) / static_cast<double>(batches)),
          bins_(bins),
          area_(batches, 0.0),
          empty_(batches, 0.0),
          arrivals_(batches, 0.0),
          sojourn_sum_(batches, 0.0),
          sojourn_count_(batches, 0.0),
          wait_sum_(batches, 0.0),
          wait_count_(batches, 0.0),
          completions_(batches, 0.0),
          completions_empty_(batches, 0.0),
          time_at_(batches, std::vector<double>(bins, 0.0)),
          completion_counts_(batches, std::vector<double>(bins, 0.0)) {}

    bool measured(double t) const { return t >= warmup_; }

    std::size_t batch(double t) const {
        const auto b = static_cast<std::size_t>((t - warmup_) / length_);
        return std::min(b, area_.size() - 1);
    }

    std::size_t bin(std::uint64_t n) const { return static_cast<std::size_t>(std::min<std::uint64_t>(n, bins_ - 1)); }

    // Queue length n held on [t0, t1).
    void hold(double t0, double t1, std::uint64_t n) {
        t0 = std::max(t0, warmup_);
        while (t1 > t0) {
            const std::size_t b = batch(t0);
            const double end = b + 1 == area_.size() ? t1 : std::min(t1, warmup_ + length_ * static_cast<double>(b + 1));
            const double dt = end - t0;
            if (!(dt > 0.0)) break;
            area_[b] += dt * static_cast<double>(n);
            if (n == 0) empty_[b] += dt;
            time_at_[b][bin(n)] += dt;
            t0 = end;
        }
    }

    void arrival(double t) {
        if (measured(t)) arrivals_[batch(t)] += 1.0;
    }
    void wait(double arrived, double started) {
        if (!measured(arrived)) return;
        const std::size_t b = batch(arrived);
        wait_sum_[b] += started - arrived;
        wait_count_[b] += 1.0;
    }
    void departure(double arrived, double t, std::uint64_t left_behind) {
        if (measured(arrived)) {
            const std::size_t b = batch(arrived);
            sojourn_sum_[b] += t - arrived;
            sojourn_count_[b] += 1.0;
        }
        if (measured(t)) {
            const std::size_t b = batch(t);
            completions_[b] += 1.0;
            if (left_behind == 0) completions_empty_[b] += 1.0;
            completion_counts_[b][bin(left_behind)] += 1.0;
        }
    }

    void finish(SimulationReport& rep) const {
        const std::size_t nb = area_.size();
        std::vector<double> avg(nb), empty(nb), rate(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            avg[b] = area_[b] / length_;
            empty[b] = empty_[b] / length_;
            rate[b] = arrivals_[b] / length_;
        }
        rep.time_avg_queue = stats::batch_estimate(avg);
        rep.empty_fraction = stats::batch_estimate(empty);
        rep.effective_rate = stats::batch_estimate(rate);
        rep.mean_sojourn = stats::ratio_estimate(sojourn_sum_, sojourn_count_);
        rep.mean_wait = stats::ratio_estimate(wait_sum_, wait_count_);
        rep.completion_empty_fraction = stats::ratio_estimate(completions_empty_, completions_);

        rep.completion_histogram.assign(bins_, 0);
        rep.continuous_histogram.assign(bins_, 0.0);
        const double span = length_ * static_cast<double>(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            std::vector<double> cont(bins_), comp(bins_);
            for (std::size_t k = 0; k < bins_; ++k) {
                cont[k] = time_at_[b][k] / length_;
                comp[k] = completions_[b] > 0.0 ? completion_counts_[b][k] / completions_[b] : 0.0;
                rep.continuous_histogram[k] += time_at_[b][k] / span;
                rep.completion_histogram[k] += static_cast<std::uint64_t>(completion_counts_[b][k]);
            }
            rep.continuous_batches.push_back(std::move(cont));
            if (completions_[b] > 0.0) rep.completion_batches.push_back(std::move(comp));
        }
        rep.measured_arrivals = static_cast<std::uint64_t>(std::accumulate(arrivals_.begin(), arrivals_.end(), 0.0));
        rep.measured_completions = static_cast<std::uint64_t>(std::accumulate(completions_.begin(), completions_.end(), 0.0));
    }

private:
    double warmup_;
    double length_;
    std::size_t bins_;
    std::vector<double> area_, empty_, arrivals_;
    std::vector<double> sojourn_sum_, sojourn_count_, wait_sum_, wait_count_;
    std::vector<double> completions_, completions_empty_;
    std::vector<std::vector<double>> time_at_, completion_counts_;
};

}  // namespace

std::string_view to_string(RateMode mode) {
    return mode == RateMode::remaining ? "remaining" : "elapsed";
}

RateMode parse_rate_mode(std::string_view text) {
    if (text == "remaining") return RateMode::remaining;
    if (text == "elapsed") return RateMode::elapsed;
    throw ConfigError("rate mode must be 'remaining' or 'elapsed'");
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<std::uint64_t> replication_seeds(std::uint64_t base_seed, std::size_t n) {
    std::vector<std::uint64_t> out(n);
    std::uint64_t state = base_seed;
    for (auto& s : out) s = splitmix64(state);
    return out;
}

double default_warmup(const QueueModel& model, double horizon) {
    return std::min(std::max(0.01 * horizon, 100.0 * model.nu()), 0.5 * horizon);
}

std::optional<double> sample_busy_arrival(double r0, double sigma, RateMode mode, const QueueModel& model, Rng& rng) {
    if (!(r0 > 0.0)) throw DomainError("sample_busy_arrival: r0 must be positive");
    const auto& f = model.reshape();
    // Segment in the argument of f: remaining time runs r0 -> 0, elapsed time sigma - r0 -> sigma.
    const double lo = mode == RateMode::remaining ? 0.0 : std::max(0.0, sigma - r0);
    const double hi = mode == RateMode::remaining ? r0 : lo + r0;
    const double bound = local_bound(f, lo, hi);
    const double rate = model.lambda0() * bound;
    if (!(rate > 0.0)) return std::nullopt;
    double t = 0.0;
    while (true) {
        t += rng.exponential(rate);
        if (t >= r0) return std::nullopt;
        const double x = mode == RateMode::remaining ? r0 - t : lo + t;
        if (rng.uniform() * bound < f(x)) return t;
    }
}

std::optional<double> sample_busy_arrival(double r0, const QueueModel& model, Rng& rng) {
    return sample_busy_arrival(r0, r0, RateMode::remaining, model, rng);
}

SimulationReport run(const QueueModel& model, const SimOptions& options) {
    const double horizon = options.horizon;
    const double warmup = options.warmup < 0.0 ? default_warmup(model, horizon) : options.warmup;
    if (!(std::isfinite(horizon) && horizon > warmup && warmup >= 0.0))
        throw DomainError("simulate: need horizon > warmup >= 0");
    if (options.batches < 2) throw DomainError("simulate: need at least two batches");
    if (options.histogram_bins < 2) throw DomainError("simulate: need at least two histogram bins");

    SimulationReport rep;
    rep.horizon = horizon;
    rep.warmup = warmup;
    rep.seed = options.seed;
    rep.mode = options.mode;

    Tally tally(warmup, horizon, options.batches, options.histogram_bins);
    Rng rng(options.seed);
    const auto& service = model.service();
    const double lambda = model.lambda0();

    SimState s;
    double sigma = 0.0;
    std::deque<double> fifo;  // arrival times, front is in service
    auto arrive = [&] {
        ++rep.arrivals;
        tally.arrival(s.clock);
        fifo.push_back(s.clock);
        ++s.n;
        rep.max_queue = std::max(rep.max_queue, s.n);
    };
    auto start_service = [&] {
        sigma = service.quantile(rng.uniform());
        s.r = sigma;
        tally.wait(fifo.front(), s.clock);
    };

    while (true) {
        if (s.n == 0) {
            if (lambda == 0.0) {
                tally.hold(s.clock, horizon, 0);
                break;
            }
            const double dt = rng.exponential(lambda);
            if (s.clock + dt >= horizon) {
                tally.hold(s.clock, horizon, 0);
                break;
            }
            tally.hold(s.clock, s.clock + dt, 0);
            s.clock += dt;
            arrive();
            start_service();
            continue;
        }
        const auto tau = sample_busy_arrival(s.r, sigma, options.mode, model, rng);
        const double step = tau ? *tau : s.r;
        if (s.clock + step >= horizon) {
            tally.hold(s.clock, horizon, s.n);
            break;
        }
        tally.hold(s.clock, s.clock + step, s.n);
        s.clock += step;
        if (tau) {
            s.r -= *tau;
            arrive();
            continue;
        }
        ++rep.completions;
        --s.n;
        const double arrived = fifo.front();
        fifo.pop_front();
        tally.departure(arrived, s.clock, s.n);
        if (s.n > 0)
            start_service();
        else
            s.r = 0.0;
    }
    rep.final_queue = s.n;
    tally.finish(rep);
    return rep;
}

SimulationReport replicate(const QueueModel& model, const SimOptions& options, const std::vector<std::uint64_t>& seeds) {
    if (seeds.size() < 2) throw DomainError("replicate: need at least two replications");
    std::vector<std::future<SimulationReport>> jobs;
    for (auto seed : seeds) {
        SimOptions opt = options;
        opt.seed = seed;
        jobs.push_back(std::async(std::launch::async, [&model, opt] { return run(model, opt); }));
    }
    std::vector<SimulationReport> reps;
    for (auto& j : jobs) reps.push_back(j.get());

    SimulationReport out;
    out.horizon = options.horizon;
    out.warmup = reps.front().warmup;
    out.seed = options.seed;
    out.mode = options.mode;
    out.replications = reps.size();
    out.completion_histogram.assign(options.histogram_bins, 0);
    out.continuous_histogram.assign(options.histogram_bins, 0.0);

    auto across = [&](auto member) {
        std::vector<double> v;
        for (const auto& r : reps) v.push_back((r.*member).value);
        return stats::batch_estimate(v);
    };
    for (const auto& r : reps) {
        out.arrivals += r.arrivals;
        out.completions += r.completions;
        out.measured_arrivals += r.measured_arrivals;
        out.measured_completions += r.measured_completions;
        out.final_queue += r.final_queue;
        out.max_queue = std::max(out.max_queue, r.max_queue);
        for (std::size_t k = 0; k < options.histogram_bins; ++k) {
            out.completion_histogram[k] += r.completion_histogram[k];
            out.continuous_histogram[k] += r.continuous_histogram[k] / static_cast<double>(reps.size());
        }
        out.completion_batches.insert(out.completion_batches.end(), r.completion_batches.begin(),
                                      r.completion_batches.end());
        out.continuous_batches.insert(out.continuous_batches.end(), r.continuous_batches.begin(),
                                      r.continuous_batches.end());
    }
    out.time_avg_queue = across(&SimulationReport::time_avg_queue);
    out.empty_fraction = across(&SimulationReport::empty_fraction);
    out.completion_empty_fraction = across(&SimulationReport::completion_empty_fraction);
    out.effective_rate = across(&SimulationReport::effective_rate);
    out.mean_sojourn = across(&SimulationReport::mean_sojourn);
    out.mean_wait = across(&SimulationReport::mean_wait);
    return out;
}

SimulationReport replicate(const QueueModel& model, const SimOptions& options, std::size_t n_reps) {
    if (n_reps < 2) throw DomainError("replicate: need at least two replications");
    return replicate(model, options, replication_seeds(options.seed, n_reps));
}

}  // namespace rmg1::sim
