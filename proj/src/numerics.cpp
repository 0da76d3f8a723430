#include "rmg1/numerics.hpp"

#include "rmg1/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace rmg1::numerics {

namespace {

unsigned depth_for(int max_subdivisions) {
    unsigned depth = 1;
    while ((1 << depth) < max_subdivisions && depth < 30) ++depth;
    return depth;
}

}  // namespace

IntegralResult integrate(const RealFn& fn, double a, double b, const Quadrature& q) {
    if (!(a <= b)) {
        std::ostringstream msg;
        msg << "integrate: empty or reversed interval [" << a << ", " << b << "]";
        throw DomainError(msg.str());
    }
    if (a == b) return {};
    double error = 0.0;
    double l1 = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
        fn, a, b, depth_for(q.max_subdivisions), q.rel_tol, &error, &l1);
    if (!std::isfinite(value)) throw NumericsError("integrate: non-finite result", value, error);
    const double allowed = std::max(q.abs_tol, q.rel_tol * std::abs(value));
    if (error > allowed) {
        std::ostringstream msg;
        msg << "integrate: tolerance not met on [" << a << ", " << b << "], estimate " << value
            << " error " << error;
        throw NumericsError(msg.str(), value, error);
    }
    return {value, error};
}

IntegralResult integrate(const RealFn& fn, double a, double b, std::span<const double> breakpoints,
                         const Quadrature& q) {
    std::vector<double> cuts{a};
    for (double x : breakpoints)
        if (x > a && x < b) cuts.push_back(x);
    std::sort(cuts.begin() + 1, cuts.end());
    cuts.push_back(b);

    IntegralResult total;
    CompensatedSum sum;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        const auto part = integrate(fn, cuts[i], cuts[i + 1], q);
        sum.add(part.value);
        total.error += part.error;
    }
    total.value = sum.value();
    return total;
}

double invert_monotone(const RealFn& fn, double target, double lo, double hi) {
    double flo = fn(lo);
    double fhi = fn(hi);
    const double tol = 1e-10 * std::max(1.0, std::abs(target));
    const double stop = 1e-14 * std::max(1.0, std::abs(target));
    if (!(lo <= hi) || target < flo - tol || target > fhi + tol) {
        std::ostringstream msg;
        msg << "invert_monotone: target " << target << " not bracketed by [" << flo << ", " << fhi << "]";
        throw DomainError(msg.str());
    }
    if (std::abs(flo - target) <= tol) return lo;
    if (std::abs(fhi - target) <= tol) return hi;

    int stale_side = 0;
    for (int it = 0; it < 400; ++it) {
        double x = lo + (target - flo) * (hi - lo) / (fhi - flo);
        // Fall back to bisection when the secant point is degenerate.
        if (!(x > lo && x < hi) || !std::isfinite(x)) x = 0.5 * (lo + hi);
        const double fx = fn(x);
        if (std::abs(fx - target) <= stop) return x;
        if (fx < target) {
            lo = x;
            flo = fx;
            if (stale_side == -1) fhi = target + 0.5 * (fhi - target);
            stale_side = -1;
        } else {
            hi = x;
            fhi = fx;
            if (stale_side == 1) flo = target - 0.5 * (target - flo);
            stale_side = 1;
        }
        if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi)))
            return 0.5 * (lo + hi);
        // Alternate in a forced bisection every few steps to bound the iteration count.
        if (it % 8 == 7) {
            const double mid = 0.5 * (lo + hi);
            const double fm = fn(mid);
            if (std::abs(fm - target) <= tol) return mid;
            if (fm < target) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
                fhi = fm;
            }
            flo = fn(lo);
            fhi = fn(hi);
            stale_side = 0;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Grid

Grid::Grid(std::vector<double> edges, int order) : edges_(std::move(edges)), order_(order) {
    if (order_ < 1) throw DomainError("Grid: order must be >= 1");
    if (edges_.size() < 2) throw DomainError("Grid: need at least one element");
    for (std::size_t i = 1; i < edges_.size(); ++i)
        if (!(edges_[i] > edges_[i - 1])) throw DomainError("Grid: element edges must increase");

    const int p = order_;
    std::vector<double> ref(p + 1);
    for (int j = 0; j <= p; ++j) ref[j] = p == 1 ? (j == 0 ? -1.0 : 1.0) : -std::cos(std::numbers::pi * j / p);

    points_.reserve(elements() * (p + 1));
    for (std::size_t e = 0; e < elements(); ++e) {
        const double a = edges_[e];
        const double b = edges_[e + 1];
        for (int j = 0; j <= p; ++j) points_.push_back(j == 0 ? a : j == p ? b : a + 0.5 * (ref[j] + 1.0) * (b - a));
    }

    // Cumulative integration of the Lagrange basis via Chebyshev coefficients.
    cum_.assign((p + 1) * (p + 1), 0.0);
    for (int k = 0; k <= p; ++k) {
        // Basis vector at ascending node k = descending Lobatto index m.
        const int m = p - k;
        std::vector<long double> a(p + 2, 0.0L);
        for (int n = 0; n <= p; ++n) {
            long double w = (m == 0 || m == p) ? 0.5L : 1.0L;
            a[n] = 2.0L / p * w * std::cos(std::numbers::pi_v<long double> * n * m / p);
        }
        a[0] *= 0.5L;
        a[p] *= 0.5L;
        std::vector<long double> b(p + 2, 0.0L);
        for (int n = 1; n <= p + 1; ++n) {
            const long double prev = a[n - 1];
            const long double next = n + 1 <= p ? a[n + 1] : 0.0L;
            b[n] = n == 1 ? prev - next / 2.0L : (prev - next) / (2.0L * n);
        }
        for (int j = 0; j <= p; ++j) {
            const long double theta = std::numbers::pi_v<long double> * (p - j) / p;
            long double s = 0.0L;
            for (int n = 1; n <= p + 1; ++n) s += b[n] * (std::cos(n * theta) - ((n % 2) ? -1.0L : 1.0L));
            cum_[j * (p + 1) + k] = static_cast<double>(s);
        }
    }

    tail_.assign((p + 1) * (p + 1), 0.0);
    for (int j = 0; j <= p; ++j)
        for (int k = 0; k <= p; ++k) tail_[j * (p + 1) + k] = cum_[p * (p + 1) + k] - cum_[j * (p + 1) + k];

    // Barycentric differentiation matrix.
    diff_.assign((p + 1) * (p + 1), 0.0);
    std::vector<double> w(p + 1);
    for (int j = 0; j <= p; ++j) w[j] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == p) ? 0.5 : 1.0);
    for (int i = 0; i <= p; ++i) {
        double diag = 0.0;
        for (int j = 0; j <= p; ++j) {
            if (i == j) continue;
            const double d = (w[j] / w[i]) / (ref[i] - ref[j]);
            diff_[i * (p + 1) + j] = d;
            diag -= d;
        }
        diff_[i * (p + 1) + i] = diag;
    }
}

Grid Grid::build(std::span<const double> breakpoints, double r_max, double max_width, int order) {
    if (!(r_max > 0.0) || !std::isfinite(r_max)) throw DomainError("Grid: r_max must be positive and finite");
    if (!(max_width > 0.0)) throw DomainError("Grid: max_width must be positive");
    std::vector<double> cuts{0.0, r_max};
    for (double x : breakpoints)
        if (x > 0.0 && x < r_max) cuts.push_back(x);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [&](double x, double y) { return std::abs(x - y) <= 1e-14 * std::max(1.0, r_max); }),
               cuts.end());
    cuts.back() = r_max;

    std::vector<double> edges{cuts.front()};
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double len = cuts[i + 1] - cuts[i];
        const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_width - 1e-12)));
        for (int s = 1; s <= pieces; ++s) edges.push_back(s == pieces ? cuts[i + 1] : cuts[i] + len * s / pieces);
    }
    return Grid(std::move(edges), order);
}

Grid Grid::uniform(double a, double b, int elements, int order) {
    if (!(b > a) || elements < 1) throw DomainError("Grid::uniform: need b > a and elements >= 1");
    std::vector<double> edges(elements + 1);
    for (int i = 0; i <= elements; ++i) edges[i] = i == elements ? b : a + (b - a) * i / elements;
    return Grid(std::move(edges), order);
}

Grid Grid::refined() const {
    std::vector<double> edges{edges_.front()};
    for (std::size_t e = 0; e + 1 < edges_.size(); ++e) {
        edges.push_back(0.5 * (edges_[e] + edges_[e + 1]));
        edges.push_back(edges_[e + 1]);
    }
    return Grid(std::move(edges), order_);
}

std::vector<double> Grid::cumulative(std::span<const double> values) const {
    if (values.size() != points_.size()) throw DomainError("Grid::cumulative: size mismatch");
    const std::size_t n = node_count();
    std::vector<double> out(points_.size(), 0.0);
    double offset = 0.0;
    for (std::size_t e = 0; e < elements(); ++e) {
        const double half = 0.5 * (edges_[e + 1] - edges_[e]);
        const std::size_t base = e * n;
        out[base] = offset;
        for (std::size_t j = 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += cum_[j * n + k] * values[base + k];
            out[base + j] = offset + half * s;
        }
        offset = out[base + n - 1];
    }
    return out;
}

double Grid::integral(std::span<const double> values) const {
    if (values.size() != points_.size()) throw DomainError("Grid::integral: size mismatch");
    const std::size_t n = node_count();
    CompensatedSum total;
    for (std::size_t e = 0; e < elements(); ++e) {
        const double half = 0.5 * (edges_[e + 1] - edges_[e]);
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += cum_[(n - 1) * n + k] * values[e * n + k];
        total.add(half * s);
    }
    return total.value();
}

std::vector<double> Grid::derivative(std::span<const double> values) const {
    if (values.size() != points_.size()) throw DomainError("Grid::derivative: size mismatch");
    const std::size_t n = node_count();
    std::vector<double> out(points_.size(), 0.0);
    for (std::size_t e = 0; e < elements(); ++e) {
        const double scale = 2.0 / (edges_[e + 1] - edges_[e]);
        const std::size_t base = e * n;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += diff_[i * n + k] * values[base + k];
            out[base + i] = s * scale;
        }
    }
    return out;
}

std::vector<double> Grid::discounted_tail(std::span<const double> h, std::span<const double> phi) const {
    if (h.size() != points_.size() || phi.size() != points_.size())
        throw DomainError("Grid::discounted_tail: size mismatch");
    const std::size_t n = node_count();
    std::vector<double> out(points_.size(), 0.0);
    std::vector<double> local(n);
    double carry = 0.0;  // tail integral at the right edge of the current element
    for (std::size_t e = elements(); e-- > 0;) {
        const double half = 0.5 * (edges_[e + 1] - edges_[e]);
        const std::size_t base = e * n;
        const double phi_end = phi[base + n - 1];
        // Weights exp(phi_end - phi(u)) >= 1, bounded by the element's discount range.
        for (std::size_t k = 0; k < n; ++k) local[k] = std::exp(phi_end - phi[base + k]) * h[base + k];
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += tail_[j * n + k] * local[k];
            const double decay = std::exp(phi[base + j] - phi_end);
            out[base + j] = decay * (half * s + carry);
        }
        carry = out[base];
    }
    return out;
}

std::vector<double> cumulative_on_grid(const RealFn& fn, const Grid& grid) {
    return grid.cumulative(grid.sample(fn));
}

}  // namespace rmg1::numerics
