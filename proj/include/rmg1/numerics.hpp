#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rmg1::numerics {

struct Quadrature {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 2000;

    /// Tolerances used for the quantities that feed recursions (p(j), moments).
    static Quadrature precise() { return {1e-15, 1e-12, 4000}; }
};

struct IntegralResult {
    double value = 0.0;
    double error = 0.0;
};

using RealFn = std::function<double(double)>;

/// Adaptive Gauss-Kronrod integration of fn over [a, b]. b may be +inf.
/// Throws NumericsError (carrying the best estimate) when the tolerance is not met.
IntegralResult integrate(const RealFn& fn, double a, double b, const Quadrature& q = {});

/// Same, but splits [a, b] at every breakpoint inside it first. Use this for
/// piecewise-smooth integrands so no Kronrod panel straddles a kink.
IntegralResult integrate(const RealFn& fn, double a, double b, std::span<const double> breakpoints,
                         const Quadrature& q = {});

/// Solves fn(x) = target for nondecreasing fn on [lo, hi] by bisection with
/// Illinois-style secant steps. Result satisfies |fn(x) - target| <= 1e-14 * max(1, |target|)
/// unless fn is flat there, in which case the bracket has collapsed to machine precision.
double invert_monotone(const RealFn& fn, double target, double lo, double hi);

/// Composite grid of Chebyshev-Lobatto elements on [0, r_max].
///
/// Element boundaries always include the supplied breakpoints, so functions
/// that are smooth between breakpoints are represented to spectral accuracy.
/// Nodes are stored per element (node index e * (order + 1) + j), so an edge
/// appears twice and sampled functions may jump there.
class Grid {
public:
    /// Elements are split so no element is wider than max_width.
    static Grid build(std::span<const double> breakpoints, double r_max, double max_width, int order = 16);
    /// [a, b] cut into `elements` equal pieces.
    static Grid uniform(double a, double b, int elements, int order = 16);

    std::span<const double> points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    std::size_t elements() const { return edges_.size() - 1; }
    int order() const { return order_; }
    double r_max() const { return points_.back(); }
    std::span<const double> edges() const { return edges_; }

    /// Same element boundaries with every element split in two.
    Grid refined() const;

    /// Entry i is the integral of the interpolant from points()[0] to points()[i].
    std::vector<double> cumulative(std::span<const double> values) const;
    double integral(std::span<const double> values) const;

    /// Derivative of the interpolant, element by element.
    std::vector<double> derivative(std::span<const double> values) const;

    /// True for nodes strictly inside an element.
    bool interior(std::size_t node) const {
        const std::size_t j = node % node_count();
        return j != 0 && j + 1 != node_count();
    }
    /// Nodes per element.
    std::size_t node_count() const { return static_cast<std::size_t>(order_) + 1; }

    /// T_i = integral over [x_i, r_max] of exp(-(phi(u) - phi(x_i))) h(u) du,
    /// for nondecreasing phi sampled on the nodes. Swept right-to-left with
    /// per-element factors, so nothing overflows for large phi.
    std::vector<double> discounted_tail(std::span<const double> h, std::span<const double> phi) const;

    /// fn at every node; the right edge of each element takes the left limit.
    template <class Fn>
    std::vector<double> sample(Fn&& fn) const {
        std::vector<double> out(points_.size());
        const std::size_t n = node_count();
        for (std::size_t i = 0; i < points_.size(); ++i) {
            const double x = points_[i];
            out[i] = fn(i % n + 1 == n && x > 0.0 ? std::nextafter(x, 0.0) : x);
        }
        return out;
    }

private:
    Grid(std::vector<double> edges, int order);

    std::vector<double> edges_;
    std::vector<double> points_;
    int order_;
    // Reference-element operators on [-1, 1], (order+1)^2 row-major.
    std::vector<double> cum_;    // cumulative integration from -1
    std::vector<double> diff_;   // differentiation
    std::vector<double> tail_;   // integration from the node to +1
};

/// cumulative_on_grid: fn sampled on the grid, then integrated from 0.
std::vector<double> cumulative_on_grid(const RealFn& fn, const Grid& grid);

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace rmg1::numerics
