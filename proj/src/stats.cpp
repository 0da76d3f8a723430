#include "rmg1/stats.hpp"

#include "rmg1/errors.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rmg1::stats {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::size_t width_of(const std::vector<std::vector<double>>& rows) {
    std::size_t w = 0;
    for (const auto& r : rows) w = std::max(w, r.size());
    return w;
}

std::vector<double> padded(std::vector<double> v, std::size_t width) {
    v.resize(std::max(width, v.size()), 0.0);
    return v;
}

std::vector<double> column_means(const std::vector<std::vector<double>>& rows, std::size_t width) {
    std::vector<double> out(width, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j];
    for (double& x : out) x /= static_cast<double>(rows.size());
    return out;
}

// Rows pooled into groups and truncated to the first d = groups - 1 coordinates.
Eigen::MatrixXd pooled_matrix(const std::vector<std::vector<double>>& rows, const std::vector<std::size_t>& group,
                              std::size_t dims) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dims));
    for (std::size_t b = 0; b < rows.size(); ++b) {
        const auto pooled = apply_pooling(padded(rows[b], group.size()), group);
        for (std::size_t j = 0; j < dims; ++j) out(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) = pooled[j];
    }
    return out;
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& x) {
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    return centered.transpose() * centered / static_cast<double>(x.rows() - 1);
}

// d' S^+ d, or +inf when d has a component along a zero-variance direction.
double quadratic_form(const Eigen::VectorXd& d, const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    const auto& vals = eig.eigenvalues();
    const double scale = std::max(vals.cwiseAbs().maxCoeff(), 1e-300);
    double q = 0.0;
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        const double proj = eig.eigenvectors().col(i).dot(d);
        if (vals(i) > 1e-12 * scale)
            q += proj * proj / vals(i);
        else if (std::abs(proj) > 1e-12)
            return std::numeric_limits<double>::infinity();
    }
    return q;
}

HistogramTest finish(double t2, double df1, double df2, double f_scale, std::size_t groups) {
    HistogramTest out;
    out.statistic = t2;
    out.df1 = df1;
    out.df2 = df2;
    out.groups = groups;
    if (df1 < 1.0) return out;
    if (!(df2 >= 1.0)) throw DomainError("histogram_test: not enough batches for the number of groups");
    out.f_value = f_scale * t2;
    if (std::isinf(out.f_value)) {
        out.p_value = 0.0;
        return out;
    }
    boost::math::fisher_f_distribution<double> law(df1, df2);
    out.p_value = boost::math::cdf(boost::math::complement(law, out.f_value));
    return out;
}

}  // namespace

bool Estimate::covers(double target, double z) const {
    return std::abs(value - target) <= half_width(z);
}

double Estimate::z_score(double target) const {
    const double diff = std::abs(value - target);
    if (diff == 0.0) return 0.0;
    return std_error > 0.0 ? diff / std_error : std::numeric_limits<double>::infinity();
}

Estimate batch_estimate(const std::vector<double>& values) {
    Estimate e;
    e.samples = values.size();
    if (values.empty()) return e;
    e.value = mean_of(values);
    if (values.size() < 2) return e;
    double ss = 0.0;
    for (double v : values) ss += (v - e.value) * (v - e.value);
    e.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
    return e;
}

Estimate ratio_estimate(const std::vector<double>& num, const std::vector<double>& den) {
    if (num.size() != den.size()) throw DomainError("ratio_estimate: size mismatch");
    const double total_den = std::accumulate(den.begin(), den.end(), 0.0);
    std::vector<double> ratios;
    for (std::size_t i = 0; i < num.size(); ++i)
        if (den[i] > 0.0) ratios.push_back(num[i] / den[i]);
    Estimate e = batch_estimate(ratios);
    if (total_den > 0.0) e.value = std::accumulate(num.begin(), num.end(), 0.0) / total_den;
    return e;
}

std::vector<std::size_t> pool_bins(const std::vector<double>& reference, double min_mass, std::size_t max_groups) {
    if (reference.empty()) return {};
    const double total = std::accumulate(reference.begin(), reference.end(), 0.0);
    for (double threshold = min_mass * total;; threshold *= 1.5) {
        std::vector<double> suffix(reference.size() + 1, 0.0);
        for (std::size_t k = reference.size(); k-- > 0;) suffix[k] = suffix[k + 1] + reference[k];
        std::vector<std::size_t> group(reference.size());
        std::size_t g = 0;
        double acc = 0.0;
        for (std::size_t k = 0; k < reference.size(); ++k) {
            group[k] = g;
            acc += reference[k];
            if (acc >= threshold && suffix[k + 1] >= threshold) {
                ++g;
                acc = 0.0;
            }
        }
        if (g + 1 <= max_groups || threshold >= total) return group;
    }
}

std::vector<double> apply_pooling(const std::vector<double>& values, const std::vector<std::size_t>& group) {
    if (group.empty()) return {};
    std::vector<double> out(group.back() + 1, 0.0);
    for (std::size_t k = 0; k < values.size(); ++k) out[group[std::min(k, group.size() - 1)]] += values[k];
    return out;
}

HistogramTest histogram_test(const std::vector<std::vector<double>>& batches, const std::vector<double>& target) {
    if (batches.size() < 2) throw DomainError("histogram_test: need at least two batches");
    const std::size_t width = std::max(width_of(batches), target.size());
    const auto ref = padded(target, width);
    const auto group = pool_bins(ref);
    const std::size_t groups = group.empty() ? 0 : group.back() + 1;
    const std::size_t dims = groups > 0 ? groups - 1 : 0;
    if (dims == 0) return finish(0.0, 0.0, 0.0, 0.0, groups);

    const auto x = pooled_matrix(batches, group, dims);
    const auto t = apply_pooling(ref, group);
    Eigen::VectorXd diff = x.colwise().mean().transpose();
    for (std::size_t j = 0; j < dims; ++j) diff(static_cast<Eigen::Index>(j)) -= t[j];

    const double n = static_cast<double>(batches.size());
    const double d = static_cast<double>(dims);
    const double t2 = n * quadratic_form(diff, covariance(x));
    return finish(t2, d, n - d, (n - d) / (d * (n - 1.0)), groups);
}

HistogramTest histogram_test(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    if (a.size() < 2 || b.size() < 2) throw DomainError("histogram_test: need at least two batches per sample");
    const std::size_t width = std::max(width_of(a), width_of(b));
    const auto ma = column_means(a, width);
    const auto mb = column_means(b, width);
    std::vector<double> ref(width);
    for (std::size_t j = 0; j < width; ++j) ref[j] = 0.5 * (ma[j] + mb[j]);
    const auto group = pool_bins(ref);
    const std::size_t groups = group.empty() ? 0 : group.back() + 1;
    const std::size_t dims = groups > 0 ? groups - 1 : 0;
    if (dims == 0) return finish(0.0, 0.0, 0.0, 0.0, groups);

    const auto xa = pooled_matrix(a, group, dims);
    const auto xb = pooled_matrix(b, group, dims);
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const Eigen::MatrixXd pooled = ((n1 - 1.0) * covariance(xa) + (n2 - 1.0) * covariance(xb)) / (n1 + n2 - 2.0);
    const Eigen::VectorXd diff = (xa.colwise().mean() - xb.colwise().mean()).transpose();
    const double d = static_cast<double>(dims);
    const double t2 = n1 * n2 / (n1 + n2) * quadratic_form(diff, pooled);
    return finish(t2, d, n1 + n2 - d - 1.0, (n1 + n2 - d - 1.0) / (d * (n1 + n2 - 2.0)), groups);
}

}  // namespace rmg1::stats
