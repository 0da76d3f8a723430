#pragma once

#include <span>
#include <vector>

namespace rmg1 {

/// Polynomial in r, ascending coefficients.
struct Polynomial {
    std::vector<double> c;

    double operator()(double x) const {
        double s = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
        return s;
    }
    bool is_zero() const;
    Polynomial derivative() const;
    /// Antiderivative with zero constant term.
    Polynomial antiderivative() const;
    /// Value at x of the antiderivative minus its value at a.
    double integral(double a, double x) const;

    friend Polynomial operator*(const Polynomial& p, const Polynomial& q);
    friend Polynomial operator+(const Polynomial& p, const Polynomial& q);
    friend Polynomial operator*(double s, const Polynomial& p);
};

/// Piecewise polynomial on [0, inf). edges.front() == 0, edges.back() == inf,
/// and polys[i] holds on [edges[i], edges[i+1]).
struct PiecewisePoly {
    std::vector<double> edges;
    std::vector<Polynomial> polys;

    std::size_t locate(double x) const;
    double operator()(double x) const { return polys[locate(x)](x); }
    /// Continuous antiderivative vanishing at 0.
    PiecewisePoly antiderivative() const;
    /// Pointwise product with the polynomial `factor` on every piece.
    PiecewisePoly times(const Polynomial& factor) const;
    /// Product of two piecewise polynomials on the union of their edges.
    friend PiecewisePoly operator*(const PiecewisePoly& a, const PiecewisePoly& b);
};

/// Exact integral of P(r) exp(-decay r) over [a, b]; b may be +inf when decay > 0.
double integrate_exp_poly(const Polynomial& p, double decay, double a, double b);

/// One piece of a density, g(r) = poly(r) exp(-decay r) on [lo, hi).
struct DensityPiece {
    double lo = 0.0;
    double hi = 0.0;
    Polynomial poly;
    double decay = 0.0;

    double operator()(double r) const;
};

}  // namespace rmg1
