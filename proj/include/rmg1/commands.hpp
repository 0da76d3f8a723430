#pragma once

#include "rmg1/model.hpp"
#include "rmg1/simulate.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rmg1::cli {

enum ExitCode : int { kOk = 0, kCompareFailed = 1, kBadInput = 2, kNumerics = 3, kUnstable = 4 };

/// eps_tail for the analytic solvers: RMG1_TOL when set, else the library default.
/// Throws ConfigError when RMG1_TOL is not a number in (0, 1e-3].
double tolerance_from_env();

/// {rho, stable, nu, nu_bar, rate_preserving, ...}. For stable models also the
/// embedded law q, E_q, the continuous-time metrics and the density checks.
nlohmann::json analyze_report(const QueueModel& model, double eps_tail);

nlohmann::json to_json(const stats::Estimate& e, double z = 3.0);
nlohmann::json to_json(const sim::SimulationReport& rep);

struct CompareOptions {
    double horizon = 1e6;
    std::uint64_t seed = 42;
    std::size_t reps = 1;
    double z = 3.0;
    double min_p = 0.01;
    double eps_tail = 1e-10;
    /// Test hook: analytic metric targets are multiplied by (1 + perturb).
    double perturb = 0.0;
};

struct ComparisonRow {
    std::string name;
    bool distribution = false;  // true: histogram test row (p_value), false: scalar metric
    double analytic = 0.0;
    double simulated = 0.0;
    double std_error = 0.0;
    double z_score = 0.0;
    double p_value = 1.0;
    std::size_t groups = 0;
    bool pass = false;
};

/// Set when the model is the normalized window with exponential(1) service,
/// where two closed forms for the mean wait are on record.
struct WaitAdjudication {
    double balance_formula = 0.0;
    double reference_closed_form = 0.0;
    double simulated = 0.0;
    double std_error = 0.0;
    bool balance_within = false;
    bool reference_within = false;
    std::string verdict;  // "balance_formula", "reference_closed_form", "both" or "neither"
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    std::optional<WaitAdjudication> wait_check;
    double z = 3.0;
    bool all_pass = false;
    sim::SimulationReport simulation;
};

/// Runs the simulator (one run, or replications when reps >= 2) and checks every
/// analytic metric against it. Throws InstabilityError for unstable models.
ComparisonReport compare(const QueueModel& model, const CompareOptions& options);
nlohmann::json to_json(const ComparisonReport& report);

struct SweepRow {
    double value = 0.0;
    bool stable = false;
    double rho = 0.0;
    double omega = 0.0;
    double mean_queue_length = 0.0;
    double empty_probability = 0.0;
    double alpha = 0.0;
};

/// Evaluates the closed-form metrics at `steps` evenly spaced values of `param`
/// in [from, to], concurrently; rows come back in sweep order.
std::vector<SweepRow> sweep(const nlohmann::json& spec, const std::string& param, double from, double to,
                            std::size_t steps);
/// CSV with header value,rho,omega,mean_queue_length,empty_probability,alpha;
/// unstable points leave the metric cells empty.
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Entry point of the rmg1 executable. Returns the process exit code.
int run(int argc, const char* const* argv);

}  // namespace rmg1::cli
