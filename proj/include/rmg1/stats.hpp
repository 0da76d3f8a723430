#pragma once

#include <cstddef>
#include <vector>

namespace rmg1::stats {

/// Point estimate with its standard error.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;  // batches or replications behind std_error

    double half_width(double z = 3.0) const { return z * std_error; }
    bool covers(double target, double z = 3.0) const;
    /// |value - target| / std_error (0 when both are exactly equal).
    double z_score(double target) const;
};

/// Mean and standard error of the mean of independent (batch) values.
Estimate batch_estimate(const std::vector<double>& values);
/// Ratio estimator sum(num) / sum(den) with the standard error taken from the
/// spread of the per-batch ratios. Batches with den = 0 are skipped for the spread.
Estimate ratio_estimate(const std::vector<double>& num, const std::vector<double>& den);

/// Consecutive bins merged into groups, each with at least `min_mass` of the
/// reference mass (at most `max_groups` groups).
std::vector<std::size_t> pool_bins(const std::vector<double>& reference, double min_mass = 0.05,
                                   std::size_t max_groups = 10);
/// Per-bin values summed into the groups returned by pool_bins (group id per bin).
std::vector<double> apply_pooling(const std::vector<double>& values, const std::vector<std::size_t>& group);

struct HistogramTest {
    double statistic = 0.0;  // Hotelling T^2
    double f_value = 0.0;
    double df1 = 0.0;
    double df2 = 0.0;
    double p_value = 1.0;
    std::size_t groups = 0;
};

/// Tests whether per-batch empirical distributions (rows of `batches`, one
/// probability vector per batch) have mean `target`. Bins are pooled by the
/// target mass, the last group is dropped (the rest determine it), and the
/// batch means give a Hotelling T^2 statistic with an F reference law.
HistogramTest histogram_test(const std::vector<std::vector<double>>& batches, const std::vector<double>& target);

/// Two-sample version: are the mean batch distributions of `a` and `b` equal?
HistogramTest histogram_test(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b);

}  // namespace rmg1::stats
