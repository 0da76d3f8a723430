#include "rmg1/errors.hpp"
#include "rmg1/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace rmg1;
using namespace rmg1::stats;

namespace {

// Batches of multinomial frequencies drawn from `pmf`.
std::vector<std::vector<double>> draw_batches(const std::vector<double>& pmf, std::size_t batches, int per_batch,
                                              std::mt19937_64& rng) {
    std::discrete_distribution<std::size_t> d(pmf.begin(), pmf.end());
    std::vector<std::vector<double>> out(batches, std::vector<double>(pmf.size(), 0.0));
    for (auto& row : out) {
        for (int i = 0; i < per_batch; ++i) row[d(rng)] += 1.0;
        for (double& x : row) x /= per_batch;
    }
    return out;
}

}  // namespace

TEST_CASE("batch and ratio estimates") {
    const auto e = batch_estimate({1.0, 2.0, 3.0, 4.0});
    CHECK(e.value == doctest::Approx(2.5));
    CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
    CHECK(e.samples == 4);
    CHECK(e.covers(2.5 + 2.9 * e.std_error));
    CHECK_FALSE(e.covers(2.5 + 3.1 * e.std_error));
    CHECK(e.z_score(2.5) == 0.0);
    CHECK(batch_estimate({7.0}).std_error == 0.0);
    CHECK(Estimate{1.0, 0.0, 1}.z_score(2.0) == INFINITY);

    const auto r = ratio_estimate({1.0, 3.0, 0.0}, {2.0, 2.0, 0.0});
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.samples == 2);
    CHECK_THROWS_AS(ratio_estimate({1.0}, {1.0, 2.0}), DomainError);
}

TEST_CASE("bin pooling") {
    const std::vector<double> ref{0.5, 0.2, 0.1, 0.08, 0.05, 0.03, 0.02, 0.01, 0.005, 0.005};
    const auto g = pool_bins(ref);
    REQUIRE(g.size() == ref.size());
    const auto pooled = apply_pooling(ref, g);
    for (double m : pooled) CHECK(m >= 0.05 - 1e-12);
    CHECK(pooled.size() <= 10);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK((g[i] == g[i - 1] || g[i] == g[i - 1] + 1));

    std::vector<double> flat(40, 1.0 / 40);
    CHECK(apply_pooling(flat, pool_bins(flat)).size() <= 10);
    CHECK(apply_pooling(flat, pool_bins(flat, 0.05, 3)).size() <= 3);
}

TEST_CASE("one-sample histogram test") {
    std::mt19937_64 rng(3);
    const std::vector<double> pmf{0.4, 0.25, 0.15, 0.1, 0.06, 0.04};
    int rejections = 0;
    for (int rep = 0; rep < 200; ++rep)
        if (histogram_test(draw_batches(pmf, 32, 400, rng), pmf).p_value < 0.05) ++rejections;
    CHECK(rejections < 25);  // nominal 10 of 200

    auto shifted = pmf;
    shifted[0] -= 0.05;
    shifted[1] += 0.05;
    const auto t = histogram_test(draw_batches(pmf, 32, 2000, rng), shifted);
    CHECK(t.p_value < 1e-6);
    CHECK(t.groups >= 3);
    CHECK(t.df1 == static_cast<double>(t.groups - 1));
}

TEST_CASE("two-sample histogram test") {
    std::mt19937_64 rng(5);
    const std::vector<double> pmf{0.5, 0.3, 0.15, 0.05};
    const auto same = histogram_test(draw_batches(pmf, 32, 1000, rng), draw_batches(pmf, 32, 1000, rng));
    CHECK(same.p_value > 1e-3);
    const std::vector<double> other{0.45, 0.33, 0.16, 0.06};
    const auto diff = histogram_test(draw_batches(pmf, 32, 5000, rng), draw_batches(other, 32, 5000, rng));
    CHECK(diff.p_value < 1e-6);
}

TEST_CASE("histogram test edge cases") {
    // Zero variance: every batch is identical.
    const std::vector<std::vector<double>> exact(8, std::vector<double>{0.5, 0.3, 0.2});
    CHECK(histogram_test(exact, {0.5, 0.3, 0.2}).p_value == doctest::Approx(1.0));
    CHECK(histogram_test(exact, {0.4, 0.4, 0.2}).p_value == 0.0);
    // A single group carries no information.
    CHECK(histogram_test(exact, std::vector<double>{1.0}).p_value == 1.0);
    CHECK_THROWS_AS(histogram_test(std::vector<std::vector<double>>{{1.0}}, std::vector<double>{1.0}), DomainError);
}
