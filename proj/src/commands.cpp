#include "rmg1/commands.hpp"

#include "rmg1/closed_forms.hpp"
#include "rmg1/continuous.hpp"
#include "rmg1/embedded.hpp"
#include "rmg1/errors.hpp"
#include "rmg1/spec_io.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <future>
#include <iostream>
#include <sstream>

namespace rmg1::cli {

using nlohmann::json;

namespace {

// Queue-length law folded into `bins` bins, the last one holding the tail.
std::vector<double> fold_tail(const std::vector<double>& p, std::size_t bins) {
    std::vector<double> out(bins, 0.0);
    for (std::size_t k = 0; k < p.size(); ++k) out[std::min(k, bins - 1)] += p[k];
    return out;
}

std::vector<std::uint64_t> trimmed(std::vector<std::uint64_t> v) {
    while (!v.empty() && v.back() == 0) v.pop_back();
    return v;
}

std::vector<double> trimmed(std::vector<double> v) {
    while (!v.empty() && v.back() == 0.0) v.pop_back();
    return v;
}

// Window end point t; +inf when f never drops to zero.
double window_t(const QueueModel& model) {
    const auto& f = model.reshape();
    return std::isinf(f.integral_limit()) ? std::numeric_limits<double>::infinity() : f.support_hint();
}

bool is_reference_window(const QueueModel& model) {
    const auto& f = model.reshape();
    const auto& g = model.service();
    if (f.family() != ReshapeFamily::window || g.family() != ServiceFamily::exponential) return false;
    if (std::abs(g.mean() - 1.0) > 1e-12) return false;
    const double t = window_t(model);
    const double normalized = std::isinf(t) ? 1.0 : 1.0 / -std::expm1(-t);
    return std::abs(f.sup() - normalized) <= 1e-12 * normalized;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

}  // namespace

double tolerance_from_env() {
    const char* raw = std::getenv("RMG1_TOL");
    if (raw == nullptr || *raw == '\0') return kDefaultEpsTail;
    char* end = nullptr;
    const double tol = std::strtod(raw, &end);
    if (end == raw || *end != '\0' || !(tol > 0.0 && tol <= 1e-3))
        throw ConfigError("RMG1_TOL must be a number in (0, 1e-3]");
    return tol;
}

json analyze_report(const QueueModel& model, double eps_tail) {
    json out;
    out["lambda0"] = model.lambda0();
    out["rho"] = model.rho();
    out["stable"] = model.stable();
    out["nu"] = model.nu();
    out["nu_bar"] = model.nu_bar();
    out["rate_preserving"] = rate_preserving(model);
    if (!model.stable()) return out;

    const auto embedded = solve_embedded(model, eps_tail);
    out["q"] = embedded.q;
    out["truncation"] = embedded.truncation;
    out["E_q"] = embedded.mean_completions;
    out["empty_probability"] = empty_probability(model);
    out["mean_queue_length"] = mean_queue_length(model);
    out["alpha"] = arrival_rate(model);
    out["omega"] = waiting_time(model);
    out["sojourn"] = sojourn_time(model);

    DensityOptions opt;
    opt.eps_tail = eps_tail;
    const auto sol = solve_densities(model, embedded, opt);
    out["marginal"] = marginal_distribution(sol);
    const auto& d = sol.diagnostics;
    out["density_checks"] = {
        {"mu_total", sol.mu_total},
        {"mean_queue_length", solution_mean_queue_length(sol)},
        {"s_identity", d.s_identity},
        {"boundary", d.boundary},
        {"flux_identity", d.flux_identity},
        {"boundary_recursion", d.boundary_recursion},
        {"balance", d.balance},
        {"grid_nodes", sol.grid.size()},
        {"refinements", d.refinements},
        {"converged", d.converged},
    };
    return out;
}

json to_json(const stats::Estimate& e, double z) {
    return {{"value", e.value}, {"std_error", e.std_error}, {"half_width", e.half_width(z)}, {"samples", e.samples}};
}

json to_json(const sim::SimulationReport& rep) {
    return {
        {"horizon", rep.horizon},
        {"warmup", rep.warmup},
        {"seed", rep.seed},
        {"mode", std::string(sim::to_string(rep.mode))},
        {"replications", rep.replications},
        {"arrivals", rep.arrivals},
        {"completions", rep.completions},
        {"measured_arrivals", rep.measured_arrivals},
        {"measured_completions", rep.measured_completions},
        {"final_queue", rep.final_queue},
        {"max_queue", rep.max_queue},
        {"time_avg_queue", to_json(rep.time_avg_queue)},
        {"empty_fraction", to_json(rep.empty_fraction)},
        {"completion_empty_fraction", to_json(rep.completion_empty_fraction)},
        {"effective_rate", to_json(rep.effective_rate)},
        {"mean_sojourn", to_json(rep.mean_sojourn)},
        {"mean_wait", to_json(rep.mean_wait)},
        {"completion_histogram", trimmed(rep.completion_histogram)},
        {"continuous_histogram", trimmed(rep.continuous_histogram)},
    };
}

ComparisonReport compare(const QueueModel& model, const CompareOptions& options) {
    if (!model.stable()) throw InstabilityError(model.rho());
    ComparisonReport out;
    out.z = options.z;

    sim::SimOptions so;
    so.horizon = options.horizon;
    so.seed = options.seed;
    out.simulation = options.reps >= 2 ? sim::replicate(model, so, options.reps) : sim::run(model, so);
    const auto& rep = out.simulation;

    const auto embedded = solve_embedded(model, options.eps_tail);
    DensityOptions dopt;
    dopt.eps_tail = options.eps_tail;
    const auto densities = solve_densities(model, embedded, dopt);
    const double scale = 1.0 + options.perturb;

    auto metric = [&](const std::string& name, double analytic, const stats::Estimate& e) {
        ComparisonRow row;
        row.name = name;
        row.analytic = analytic * scale;
        row.simulated = e.value;
        row.std_error = e.std_error;
        row.z_score = e.z_score(row.analytic);
        row.pass = e.covers(row.analytic, options.z);
        out.rows.push_back(row);
    };
    metric("empty_fraction", empty_probability(model), rep.empty_fraction);
    metric("completion_empty_fraction", embedded.q.front(), rep.completion_empty_fraction);
    metric("time_avg_queue", mean_queue_length(model), rep.time_avg_queue);
    metric("effective_rate", arrival_rate(model), rep.effective_rate);
    metric("mean_sojourn", sojourn_time(model), rep.mean_sojourn);
    metric("mean_wait", waiting_time(model), rep.mean_wait);

    auto distribution = [&](const std::string& name, const std::vector<std::vector<double>>& batches,
                            const std::vector<double>& target) {
        const auto test = stats::histogram_test(batches, fold_tail(target, rep.completion_histogram.size()));
        ComparisonRow row;
        row.name = name;
        row.distribution = true;
        row.p_value = test.p_value;
        row.groups = test.groups;
        row.analytic = test.f_value;
        row.pass = test.p_value > options.min_p;
        out.rows.push_back(row);
    };
    distribution("completion_histogram", rep.completion_batches, embedded.q);
    distribution("continuous_histogram", rep.continuous_batches, marginal_distribution(densities));

    if (is_reference_window(model)) {
        WaitAdjudication w;
        const double t = window_t(model);
        w.balance_formula = closed_form::window_exponential_wait(t, model.lambda0());
        w.reference_closed_form = closed_form::window_exponential_wait_reference(t, model.lambda0());
        w.simulated = rep.mean_wait.value;
        w.std_error = rep.mean_wait.std_error;
        w.balance_within = rep.mean_wait.covers(w.balance_formula, options.z);
        w.reference_within = rep.mean_wait.covers(w.reference_closed_form, options.z);
        w.verdict = w.balance_within && w.reference_within ? "both"
                    : w.balance_within                     ? "balance_formula"
                    : w.reference_within                   ? "reference_closed_form"
                                                           : "neither";
        out.wait_check = w;
    }

    out.all_pass = std::all_of(out.rows.begin(), out.rows.end(), [](const auto& r) { return r.pass; });
    return out;
}

json to_json(const ComparisonReport& report) {
    json rows = json::array();
    for (const auto& r : report.rows) {
        if (r.distribution)
            rows.push_back({{"name", r.name},
                            {"test", "batch-means Hotelling T^2"},
                            {"f_value", r.analytic},
                            {"p_value", r.p_value},
                            {"groups", r.groups},
                            {"pass", r.pass}});
        else
            rows.push_back({{"name", r.name},
                            {"analytic", r.analytic},
                            {"simulated", r.simulated},
                            {"std_error", r.std_error},
                            {"half_width", r.std_error * report.z},
                            {"z_score", r.z_score},
                            {"pass", r.pass}});
    }
    json out = {{"z", report.z}, {"all_pass", report.all_pass}, {"rows", rows},
                {"simulation", to_json(report.simulation)}};
    if (report.wait_check) {
        const auto& w = *report.wait_check;
        out["waiting_time_check"] = {{"balance_formula", w.balance_formula},
                                     {"reference_closed_form", w.reference_closed_form},
                                     {"simulated", w.simulated},
                                     {"std_error", w.std_error},
                                     {"balance_formula_within", w.balance_within},
                                     {"reference_closed_form_within", w.reference_within},
                                     {"agrees_with", w.verdict}};
    }
    return out;
}

std::vector<SweepRow> sweep(const json& spec, const std::string& param, double from, double to, std::size_t steps) {
    if (steps < 1) throw ConfigError("sweep: steps must be >= 1");
    if (!std::isfinite(from) || !std::isfinite(to)) throw ConfigError("sweep: range must be finite");
    std::vector<double> values(steps);
    for (std::size_t i = 0; i < steps; ++i)
        values[i] = steps == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1);

    // Parse everything up front so malformed points fail before any work starts.
    std::vector<QueueModel> models;
    for (double v : values) models.push_back(io::model_from_json(io::with_parameter(spec, param, v)));

    std::vector<std::future<SweepRow>> jobs;
    for (std::size_t i = 0; i < steps; ++i) {
        jobs.push_back(std::async(std::launch::async, [&, i] {
            const auto& m = models[i];
            SweepRow row;
            row.value = values[i];
            row.rho = m.rho();
            row.stable = m.stable();
            if (row.stable) {
                row.omega = waiting_time(m);
                row.mean_queue_length = mean_queue_length(m);
                row.empty_probability = empty_probability(m);
                row.alpha = arrival_rate(m);
            }
            return row;
        }));
    }
    std::vector<SweepRow> rows;
    for (auto& j : jobs) rows.push_back(j.get());
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    // Shortest text that reads back to the same double.
    auto num = [](double x) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, x);
        return std::string(buf, res.ptr);
    };
    std::ostringstream out;
    out << "value,rho,omega,mean_queue_length,empty_probability,alpha\n";
    for (const auto& r : rows) {
        out << num(r.value) << ',' << num(r.rho) << ',';
        if (r.stable)
            out << num(r.omega) << ',' << num(r.mean_queue_length) << ',' << num(r.empty_probability) << ','
                << num(r.alpha);
        else
            out << ",,,";
        out << '\n';
    }
    return out.str();
}

int run(int argc, const char* const* argv) {
    CLI::App app{"rmg1: analysis and simulation of queues whose arrival rate depends on the remaining service time"};
    app.require_subcommand(1);

    std::string spec_path, out_path;
    double horizon = 1e6, warmup = -1.0, from = 0.0, to = 1.0, perturb = 0.0;
    std::uint64_t seed = 42;
    std::size_t reps = 1, steps = 25;
    std::string mode = "remaining", param = "lambda0";

    auto* analyze = app.add_subcommand("analyze", "Stability verdict, stationary laws and performance metrics");
    auto* simulate = app.add_subcommand("simulate", "Seeded discrete-event simulation");
    auto* cmp = app.add_subcommand("compare", "Simulation against the analytic metrics (exit 1 on mismatch)");
    auto* swp = app.add_subcommand("sweep", "Closed-form metrics over a parameter range, as CSV");
    for (auto* sub : {analyze, simulate, cmp, swp}) {
        sub->add_option("--spec", spec_path, "JSON model spec")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_path, "Output file (stdout when omitted)");
    }
    for (auto* sub : {simulate, cmp}) {
        sub->add_option("--horizon", horizon, "Simulated time")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--reps", reps, "Independent replications");
    }
    simulate->add_option("--mode", mode, "Arrival-rate clock")->check(CLI::IsMember({"remaining", "elapsed"}));
    simulate->add_option("--warmup", warmup, "Discarded initial time (default: max(1% of horizon, 100 nu))");
    cmp->add_option("--perturb-analytic", perturb, "Test hook: scale analytic targets by (1 + x)")->group("");
    swp->add_option("--param", param, "lambda0 or a reshape field (reshape.<name>)");
    swp->add_option("--from", from, "First value")->required();
    swp->add_option("--to", to, "Last value")->required();
    swp->add_option("--steps", steps, "Number of points")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kBadInput;
    }

    try {
        const double eps_tail = tolerance_from_env();
        if (*analyze) {
            const auto model = io::load_model(spec_path);
            if (!model.stable())
                std::cerr << "warning: unstable system (rho = " << model.rho() << " >= 1); no stationary law\n";
            write_text(out_path, analyze_report(model, eps_tail).dump(2) + "\n");
            return kOk;
        }
        if (*simulate) {
            const auto model = io::load_model(spec_path);
            sim::SimOptions opt;
            opt.horizon = horizon;
            opt.seed = seed;
            opt.mode = sim::parse_rate_mode(mode);
            opt.warmup = warmup;
            const auto rep = reps >= 2 ? sim::replicate(model, opt, reps) : sim::run(model, opt);
            write_text(out_path, to_json(rep).dump(2) + "\n");
            return kOk;
        }
        if (*cmp) {
            const auto model = io::load_model(spec_path);
            CompareOptions opt;
            opt.horizon = horizon;
            opt.seed = seed;
            opt.reps = reps;
            opt.eps_tail = eps_tail;
            opt.perturb = perturb;
            const auto report = compare(model, opt);
            write_text(out_path, to_json(report).dump(2) + "\n");
            for (const auto& r : report.rows)
                if (!r.pass) std::cerr << "mismatch: " << r.name << "\n";
            return report.all_pass ? kOk : kCompareFailed;
        }
        if (*swp) {
            const auto rows = sweep(io::read_json_file(spec_path), param, from, to, steps);
            write_text(out_path, sweep_csv(rows));
            return kOk;
        }
    } catch (const InstabilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUnstable;
    } catch (const NumericsError& e) {
        std::cerr << "numerics error: " << e.what() << "\n";
        return kNumerics;
    } catch (const ConfigError& e) {
        std::cerr << "bad input: " << e.what() << "\n";
        return kBadInput;
    } catch (const DomainError& e) {
        std::cerr << "bad input: " << e.what() << "\n";
        return kBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerics;
    }
    return kBadInput;
}

}  // namespace rmg1::cli
