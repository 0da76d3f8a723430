#include "rmg1/piecewise.hpp"

#include "rmg1/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rmg1 {

bool Polynomial::is_zero() const {
    return std::all_of(c.begin(), c.end(), [](double x) { return x == 0.0; });
}

Polynomial Polynomial::derivative() const {
    Polynomial d;
    for (std::size_t k = 1; k < c.size(); ++k) d.c.push_back(c[k] * static_cast<double>(k));
    return d;
}

Polynomial Polynomial::antiderivative() const {
    Polynomial a;
    a.c.push_back(0.0);
    for (std::size_t k = 0; k < c.size(); ++k) a.c.push_back(c[k] / static_cast<double>(k + 1));
    return a;
}

double Polynomial::integral(double a, double x) const {
    const Polynomial anti = antiderivative();
    return anti(x) - anti(a);
}

Polynomial operator*(const Polynomial& p, const Polynomial& q) {
    if (p.c.empty() || q.c.empty()) return {};
    Polynomial out;
    out.c.assign(p.c.size() + q.c.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.c.size(); ++i)
        for (std::size_t j = 0; j < q.c.size(); ++j) out.c[i + j] += p.c[i] * q.c[j];
    return out;
}

Polynomial operator+(const Polynomial& p, const Polynomial& q) {
    Polynomial out;
    out.c.assign(std::max(p.c.size(), q.c.size()), 0.0);
    for (std::size_t i = 0; i < p.c.size(); ++i) out.c[i] += p.c[i];
    for (std::size_t i = 0; i < q.c.size(); ++i) out.c[i] += q.c[i];
    return out;
}

Polynomial operator*(double s, const Polynomial& p) {
    Polynomial out = p;
    for (double& x : out.c) x *= s;
    return out;
}

std::size_t PiecewisePoly::locate(double x) const {
    // Last piece whose left edge is <= x.
    auto it = std::upper_bound(edges.begin(), edges.end() - 1, x);
    if (it == edges.begin()) return 0;
    return std::min<std::size_t>(static_cast<std::size_t>(it - edges.begin()) - 1, polys.size() - 1);
}

PiecewisePoly PiecewisePoly::antiderivative() const {
    PiecewisePoly out;
    out.edges = edges;
    double offset = 0.0;
    for (std::size_t i = 0; i < polys.size(); ++i) {
        Polynomial anti = polys[i].antiderivative();
        const double shift = offset - anti(edges[i]);
        anti = anti + Polynomial{{shift}};
        if (i + 1 < polys.size()) offset = anti(edges[i + 1]);
        out.polys.push_back(std::move(anti));
    }
    return out;
}

PiecewisePoly PiecewisePoly::times(const Polynomial& factor) const {
    PiecewisePoly out;
    out.edges = edges;
    for (const auto& p : polys) out.polys.push_back(p * factor);
    return out;
}

PiecewisePoly operator*(const PiecewisePoly& a, const PiecewisePoly& b) {
    std::vector<double> edges;
    edges.insert(edges.end(), a.edges.begin(), a.edges.end());
    edges.insert(edges.end(), b.edges.begin(), b.edges.end());
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    PiecewisePoly out;
    out.edges = edges;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double x = edges[i];
        out.polys.push_back(a.polys[a.locate(x)] * b.polys[b.locate(x)]);
    }
    return out;
}

double integrate_exp_poly(const Polynomial& p, double decay, double a, double b) {
    if (!(b >= a)) throw DomainError("integrate_exp_poly: reversed interval");
    if (a == b || p.is_zero()) return 0.0;
    if (decay == 0.0) {
        if (std::isinf(b)) throw DomainError("integrate_exp_poly: divergent polynomial tail");
        return p.integral(a, b);
    }
    // Antiderivative: -exp(-decay r) * sum_k p^(k)(r) / decay^(k+1).
    auto anti = [&](double r) {
        double s = 0.0;
        Polynomial d = p;
        double scale = 1.0 / decay;
        while (!d.c.empty()) {
            s += d(r) * scale;
            scale /= decay;
            d = d.derivative();
        }
        return -std::exp(-decay * r) * s;
    };
    const double upper = std::isinf(b) ? 0.0 : anti(b);
    return upper - anti(a);
}

double DensityPiece::operator()(double r) const {
    const double base = poly(r);
    return decay == 0.0 ? base : base * std::exp(-decay * r);
}

}  // namespace rmg1
