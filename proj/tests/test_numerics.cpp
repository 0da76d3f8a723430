#include "rmg1/errors.hpp"
#include "rmg1/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace rmg1;
using namespace rmg1::numerics;

TEST_CASE("integrate: smooth, infinite and kinked integrands") {
    CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI).value == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(integrate([](double x) { return std::exp(-x); }, 0.0, INFINITY).value ==
          doctest::Approx(1.0).epsilon(1e-10));
    const std::vector<double> kink{0.3};
    const auto r = integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, kink, Quadrature::precise());
    CHECK(r.value == doctest::Approx(0.29).epsilon(1e-14));
    CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0).value == 0.0);
}

TEST_CASE("integrate: errors") {
    CHECK_THROWS_AS(integrate([](double x) { return x; }, 1.0, 0.0), DomainError);
    const Quadrature hopeless{1e-16, 1e-16, 1};
    CHECK_THROWS_AS(integrate([](double x) { return std::sin(200.0 * x) * std::exp(x); }, 0.0, 10.0, hopeless),
                    NumericsError);
}

TEST_CASE("invert_monotone") {
    CHECK(invert_monotone([](double x) { return x * x * x; }, 8.0, 0.0, 5.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(invert_monotone([](double x) { return std::exp(x); }, 1.0, 0.0, 3.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(invert_monotone([](double x) { return x; }, 9.0, 0.0, 5.0), DomainError);
}

TEST_CASE("Grid: integration, cumulative and derivative are spectrally accurate") {
    const std::vector<double> bps{0.5};
    const auto g = Grid::build(bps, 2.0, 0.4, 16);
    CHECK(g.r_max() == 2.0);
    const auto e = g.sample([](double x) { return std::exp(x); });
    CHECK(g.integral(e) == doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-14));
    const auto c = g.cumulative(e);
    const auto d = g.derivative(e);
    const auto pts = g.points();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(c[i] == doctest::Approx(std::exp(pts[i]) - 1.0).epsilon(1e-13));
        CHECK(d[i] == doctest::Approx(std::exp(pts[i])).epsilon(1e-9));
    }
    // 0.5 is an element edge.
    bool has_edge = false;
    for (double x : g.edges()) has_edge = has_edge || x == 0.5;
    CHECK(has_edge);
}

TEST_CASE("Grid: jumps at element edges are integrated exactly") {
    const std::vector<double> bps{1.0};
    const auto g = Grid::build(bps, 3.0, 1.0, 8);
    const auto step = g.sample([](double x) { return x < 1.0 ? 2.0 : 0.5; });
    CHECK(g.integral(step) == doctest::Approx(2.0 + 1.0).epsilon(1e-14));
}

TEST_CASE("Grid: discounted tail against the closed form") {
    const double rate = 7.0;
    const auto g = Grid::uniform(0.0, 5.0, 12, 16);
    const auto phi = g.sample([&](double x) { return rate * x; });
    const auto ones = g.sample([](double) { return 1.0; });
    const auto tail = g.discounted_tail(ones, phi);
    const auto pts = g.points();
    for (std::size_t i = 0; i < pts.size(); ++i)
        CHECK(tail[i] == doctest::Approx(-std::expm1(-rate * (5.0 - pts[i])) / rate).epsilon(1e-12));
}

TEST_CASE("Grid: refinement halves every element") {
    const auto g = Grid::uniform(0.0, 1.0, 3, 4);
    const auto r = g.refined();
    CHECK(r.elements() == 6);
    CHECK(r.size() == 6 * 5);
    CHECK_THROWS_AS(Grid::uniform(1.0, 0.0, 2), DomainError);
}

TEST_CASE("CompensatedSum keeps low-order bits") {
    CompensatedSum s;
    s.add(1e16);
    s.add(1.0);
    s.add(-1e16);
    CHECK(s.value() == 1.0);
}
