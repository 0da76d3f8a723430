#include "rmg1/model.hpp"

#include "rmg1/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace rmg1 {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// G(r_max) < 1e-12 for exponential tails: ln(1e12) plus a little slack.
constexpr double kExpTailCut = 12.0 * std::numbers::ln10 + 0.01;

void require(bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
}

double expect_closed_form_impl(const PiecewisePoly& h, std::span<const DensityPiece> pieces) {
    numerics::CompensatedSum sum;
    for (const auto& piece : pieces) {
        if (piece.poly.is_zero()) continue;
        for (std::size_t i = 0; i + 1 < h.edges.size(); ++i) {
            const double a = std::max(piece.lo, h.edges[i]);
            const double b = std::min(piece.hi, h.edges[i + 1]);
            if (!(b > a)) continue;
            sum.add(integrate_exp_poly(h.polys[i] * piece.poly, piece.decay, a, b));
        }
    }
    return sum.value();
}

std::vector<double> merged_breakpoints(std::span<const double> a, std::span<const double> b, double r_max) {
    std::vector<double> out;
    for (double x : a)
        if (x > 0.0 && x < r_max) out.push_back(x);
    for (double x : b)
        if (x > 0.0 && x < r_max) out.push_back(x);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double moment(const PiecewisePoly& h, const ServiceDistribution& service, std::span<const double> h_bps, Route route) {
    const bool closed = route == Route::closed_form || (route == Route::automatic && service.has_closed_form());
    if (closed) {
        if (!service.has_closed_form()) throw DomainError("closed form unavailable for this service law");
        return expect_closed_form(h, service);
    }
    return expect_quadrature([&h](double r) { return h(r); }, h_bps, service);
}

}  // namespace

std::string_view to_string(ReshapeFamily family) {
    switch (family) {
        case ReshapeFamily::constant: return "constant";
        case ReshapeFamily::linear: return "linear";
        case ReshapeFamily::window: return "window";
        case ReshapeFamily::tabulated: return "table";
    }
    return "?";
}

std::string_view to_string(ServiceFamily family) {
    switch (family) {
        case ServiceFamily::exponential: return "exponential";
        case ServiceFamily::uniform: return "uniform";
        case ServiceFamily::tabulated: return "table";
        case ServiceFamily::time_changed: return "time_changed";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// ReshapeFunction

ReshapeFunction::ReshapeFunction(ReshapeFamily family, PiecewisePoly f) : family_(family), f_(std::move(f)) {
    const auto& last = f_.polys.back();
    require(last.c.size() <= 1, "reshape: f must be constant past its last breakpoint");
    for (std::size_t i = 0; i < f_.polys.size(); ++i) {
        const double lo = f_.polys[i](f_.edges[i]);
        const double hi = std::isinf(f_.edges[i + 1]) ? lo : f_.polys[i](f_.edges[i + 1]);
        require(std::isfinite(lo) && std::isfinite(hi), "reshape: f must be finite");
        require(lo >= -1e-14 && hi >= -1e-14, "reshape: f must be nonnegative");
        sup_ = std::max({sup_, lo, hi});
    }
    F_ = f_.antiderivative();
    U_ = f_.times(Polynomial{{0.0, 1.0}}).antiderivative();
    for (std::size_t i = 1; i + 1 < f_.edges.size(); ++i) breakpoints_.push_back(f_.edges[i]);
    support_hint_ = breakpoints_.empty() ? 0.0 : breakpoints_.back();
}

ReshapeFunction ReshapeFunction::constant(double value) {
    require(std::isfinite(value) && value >= 0.0, "reshape constant: value must be finite and >= 0");
    return ReshapeFunction(ReshapeFamily::constant, PiecewisePoly{{0.0, kInf}, {Polynomial{{value}}}});
}

ReshapeFunction ReshapeFunction::linear(double a, double b, double end, double beyond) {
    require(std::isfinite(end) && end > 0.0, "reshape linear: end must be positive and finite");
    require(std::isfinite(a) && std::isfinite(b) && std::isfinite(beyond), "reshape linear: parameters must be finite");
    return ReshapeFunction(ReshapeFamily::linear,
                           PiecewisePoly{{0.0, end, kInf}, {Polynomial{{a, b}}, Polynomial{{beyond}}}});
}

ReshapeFunction ReshapeFunction::window(double t, double height) {
    require(t > 0.0, "reshape window: t must be positive");
    require(std::isfinite(height) && height >= 0.0, "reshape window: height must be finite and >= 0");
    if (std::isinf(t))
        return ReshapeFunction(ReshapeFamily::window, PiecewisePoly{{0.0, kInf}, {Polynomial{{height}}}});
    return ReshapeFunction(ReshapeFamily::window,
                           PiecewisePoly{{0.0, t, kInf}, {Polynomial{{height}}, Polynomial{{0.0}}}});
}

ReshapeFunction ReshapeFunction::window(double t) {
    require(t > 0.0, "reshape window: t must be positive");
    return window(t, 1.0 / -std::expm1(-t));
}

ReshapeFunction ReshapeFunction::tabulated(std::vector<double> x, std::vector<double> v) {
    require(!x.empty() && x.size() == v.size(), "reshape table: breakpoints and values must have equal, nonzero length");
    require(x.front() == 0.0, "reshape table: first breakpoint must be 0");
    for (std::size_t i = 1; i < x.size(); ++i)
        require(std::isfinite(x[i]) && x[i] > x[i - 1], "reshape table: breakpoints must increase");
    PiecewisePoly f;
    f.edges = x;
    f.edges.push_back(kInf);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double slope = (v[i + 1] - v[i]) / (x[i + 1] - x[i]);
        f.polys.push_back(Polynomial{{v[i] - slope * x[i], slope}});
    }
    f.polys.push_back(Polynomial{{v.back()}});
    return ReshapeFunction(ReshapeFamily::tabulated, std::move(f));
}

double ReshapeFunction::operator()(double r) const {
    if (r < 0.0) throw DomainError("reshape: f evaluated at negative r");
    return std::max(0.0, f_(r));
}

double ReshapeFunction::integral(double r) const {
    if (!(r >= 0.0)) throw DomainError("reshape: F evaluated at negative r");
    if (std::isinf(r)) return integral_limit();
    return F_(r);
}

double ReshapeFunction::integral_limit() const {
    if (!f_.polys.back().is_zero()) return kInf;
    return F_(f_.edges[f_.edges.size() - 2]);
}

double ReshapeFunction::inverse_integral(double s) const {
    const double limit = integral_limit();
    if (!(s >= 0.0) || !(s < limit)) {
        std::ostringstream msg;
        msg << "reshape: H(" << s << ") outside [0, " << limit << ")";
        throw DomainError(msg.str());
    }
    // First piece whose right end lies above s.
    std::size_t i = 0;
    while (i + 1 < f_.polys.size() && !(F_(f_.edges[i + 1]) > s)) ++i;
    const double lo = f_.edges[i];
    const double F_lo = F_(lo);
    const bool flat_before = i > 0 && F_(f_.edges[i - 1]) == s;
    const double f_lo = f_.polys[i](lo);
    const double slope = f_.polys[i].c.size() > 1 ? f_.polys[i].c[1] : 0.0;
    if (flat_before || (s == F_lo && f_lo <= 0.0 && slope <= 0.0))
        throw NotInvertibleError("reshape: f vanishes on an interval around H(s)");
    const double d = s - F_lo;
    if (d == 0.0) return lo;
    const double disc = std::max(0.0, f_lo * f_lo + 2.0 * slope * d);
    const double denom = f_lo + std::sqrt(disc);
    if (!(denom > 0.0)) throw NotInvertibleError("reshape: f vanishes around H(s)");
    double x = lo + 2.0 * d / denom;
    if (i + 1 < f_.edges.size() && std::isfinite(f_.edges[i + 1])) x = std::min(x, f_.edges[i + 1]);
    // One Newton polish on the exact piece.
    const double fx = f_.polys[i](x);
    if (fx > 0.0) {
        const double nx = x - (F_(x) - s) / fx;
        if (nx >= lo && (std::isinf(f_.edges[i + 1]) || nx <= f_.edges[i + 1])) x = nx;
    }
    return x;
}

bool ReshapeFunction::positive_on(double r_end) const {
    for (std::size_t i = 0; i < f_.polys.size(); ++i) {
        const double lo = f_.edges[i];
        if (!(lo < r_end)) break;
        const double hi = std::min(f_.edges[i + 1], r_end);
        if (!(f_.polys[i](lo) > 0.0)) return false;
        if (std::isfinite(hi) && !(f_.polys[i](hi) > 0.0)) return false;
    }
    return true;
}

bool ReshapeFunction::increasing_on(double r_end) const {
    for (std::size_t i = 0; i < f_.polys.size(); ++i) {
        const double lo = f_.edges[i];
        if (!(lo < r_end)) break;
        const double hi = std::min(f_.edges[i + 1], r_end);
        const auto& p = f_.polys[i];
        const double slope = p.c.size() > 1 ? p.c[1] : 0.0;
        const double at_lo = p(lo);
        const double at_hi = std::isfinite(hi) ? p(hi) : (slope > 0.0 ? 1.0 : slope < 0.0 ? -1.0 : at_lo);
        // Linear piece: nonnegative at both ends and not identically zero.
        if (at_lo < 0.0 || at_hi < 0.0 || (at_lo == 0.0 && at_hi == 0.0)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// ServiceDistribution

void ServiceDistribution::finish_pieces() {
    tail_at_.assign(pieces_.size() + 1, 0.0);
    numerics::CompensatedSum mass;
    numerics::CompensatedSum mean;
    for (std::size_t i = pieces_.size(); i-- > 0;) {
        const auto& p = pieces_[i];
        const double m = integrate_exp_poly(p.poly, p.decay, p.lo, p.hi);
        mass.add(m);
        tail_at_[i] = mass.value();
        mean.add(integrate_exp_poly(p.poly * Polynomial{{0.0, 1.0}}, p.decay, p.lo, p.hi));
    }
    if (std::abs(mass.value() - 1.0) > 1e-8) throw ConfigError("service: density does not integrate to 1");
    mean_ = mean.value();
}

ServiceDistribution ServiceDistribution::exponential(double mean) {
    require(std::isfinite(mean) && mean > 0.0, "service exponential: mean must be positive and finite");
    ServiceDistribution s;
    s.family_ = ServiceFamily::exponential;
    s.pieces_ = {DensityPiece{0.0, kInf, Polynomial{{1.0 / mean}}, 1.0 / mean}};
    s.r_max_ = mean * kExpTailCut;
    s.bounded_ = false;
    s.finish_pieces();
    return s;
}

ServiceDistribution ServiceDistribution::uniform(double a, double b) {
    require(std::isfinite(a) && std::isfinite(b) && a >= 0.0 && b > a, "service uniform: need 0 <= a < b");
    ServiceDistribution s;
    s.family_ = ServiceFamily::uniform;
    if (a > 0.0) {
        s.pieces_.push_back(DensityPiece{0.0, a, Polynomial{{0.0}}, 0.0});
        s.breakpoints_.push_back(a);
    }
    s.pieces_.push_back(DensityPiece{a, b, Polynomial{{1.0 / (b - a)}}, 0.0});
    s.pieces_.push_back(DensityPiece{b, kInf, Polynomial{{0.0}}, 0.0});
    s.breakpoints_.push_back(b);
    s.r_max_ = b;
    s.bounded_ = true;
    s.finish_pieces();
    return s;
}

ServiceDistribution ServiceDistribution::tabulated(std::vector<double> x, std::vector<double> v) {
    require(x.size() >= 2 && x.size() == v.size(), "service table: need >= 2 breakpoints with matching values");
    require(x.front() >= 0.0, "service table: breakpoints must be >= 0");
    double area = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(std::isfinite(v[i]) && v[i] >= 0.0, "service table: density values must be finite and >= 0");
        if (i > 0) {
            require(std::isfinite(x[i]) && x[i] > x[i - 1], "service table: breakpoints must increase");
            area += 0.5 * (v[i] + v[i - 1]) * (x[i] - x[i - 1]);
        }
    }
    require(area > 0.0, "service table: density has zero mass");
    ServiceDistribution s;
    s.family_ = ServiceFamily::tabulated;
    if (x.front() > 0.0) s.pieces_.push_back(DensityPiece{0.0, x.front(), Polynomial{{0.0}}, 0.0});
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double v0 = v[i] / area;
        const double slope = (v[i + 1] - v[i]) / area / (x[i + 1] - x[i]);
        s.pieces_.push_back(DensityPiece{x[i], x[i + 1], Polynomial{{v0 - slope * x[i], slope}}, 0.0});
    }
    s.pieces_.push_back(DensityPiece{x.back(), kInf, Polynomial{{0.0}}, 0.0});
    for (double xi : x)
        if (xi > 0.0) s.breakpoints_.push_back(xi);
    s.r_max_ = x.back();
    s.bounded_ = true;
    s.finish_pieces();
    return s;
}

ServiceDistribution ServiceDistribution::time_changed(const ServiceDistribution& base, const ReshapeFunction& reshape) {
    if (!reshape.positive_on(base.r_max()))
        throw NotInvertibleError("time change needs f > 0 on the support of the service law");
    ServiceDistribution s;
    s.family_ = ServiceFamily::time_changed;
    s.base_ = std::make_shared<const ServiceDistribution>(base);
    s.reshape_ = std::make_shared<const ReshapeFunction>(reshape);
    s.bounded_ = base.bounded_support();
    s.r_max_ = reshape.integral(base.r_max());
    for (double x : merged_breakpoints(base.breakpoints(), reshape.breakpoints(), base.r_max()))
        s.breakpoints_.push_back(reshape.integral(x));
    if (base.bounded_support()) s.breakpoints_.push_back(s.r_max_);
    s.mean_ = moment(reshape.cumulative(), base, reshape.breakpoints(), Route::automatic);
    return s;
}

namespace {
std::size_t piece_index(std::span<const DensityPiece> pieces, double r) {
    auto it = std::upper_bound(pieces.begin(), pieces.end(), r,
                               [](double x, const DensityPiece& p) { return x < p.lo; });
    return it == pieces.begin() ? 0 : static_cast<std::size_t>(it - pieces.begin()) - 1;
}
}  // namespace

double ServiceDistribution::pdf(double r) const {
    if (r < 0.0) return 0.0;
    if (family_ == ServiceFamily::time_changed) {
        if (!(r < reshape_->integral_limit())) return 0.0;
        const double x = reshape_->inverse_integral(r);
        return base_->pdf(x) / (*reshape_)(x);
    }
    return std::max(0.0, pieces_[piece_index(pieces_, r)](r));
}

double ServiceDistribution::tail(double r) const {
    if (r <= 0.0) return 1.0;
    if (family_ == ServiceFamily::time_changed) {
        if (!(r < reshape_->integral_limit())) return 0.0;
        return base_->tail(reshape_->inverse_integral(r));
    }
    const std::size_t i = piece_index(pieces_, r);
    const auto& p = pieces_[i];
    return std::clamp(integrate_exp_poly(p.poly, p.decay, r, p.hi) + tail_at_[i + 1], 0.0, 1.0);
}

double ServiceDistribution::quantile(double u) const {
    if (!(u >= 0.0 && u < 1.0)) throw DomainError("service: quantile needs u in [0, 1)");
    switch (family_) {
        case ServiceFamily::exponential: return -mean_ * std::log1p(-u);
        case ServiceFamily::uniform: {
            const auto& p = pieces_[pieces_.size() - 2];
            return p.lo + u * (p.hi - p.lo);
        }
        case ServiceFamily::time_changed: return reshape_->integral(base_->quantile(u));
        case ServiceFamily::tabulated: break;
    }
    // First piece whose right end has cdf above u.
    std::size_t i = 0;
    while (i + 1 < pieces_.size() && !(1.0 - tail_at_[i + 1] > u)) ++i;
    const auto& p = pieces_[i];
    if (std::isinf(p.hi)) return p.lo;
    return numerics::invert_monotone([this](double r) { return cdf(r); }, u, p.lo, p.hi);
}

// ---------------------------------------------------------------------------
// QueueModel and moments

QueueModel::QueueModel(double lambda0, ReshapeFunction reshape, ServiceDistribution service)
    : lambda0_(lambda0), reshape_(std::move(reshape)), service_(std::move(service)) {
    require(std::isfinite(lambda0_) && lambda0_ >= 0.0, "lambda0 must be finite and >= 0");
    nu_bar_ = moment(reshape_.cumulative(), service_, reshape_.breakpoints(), Route::automatic);
}

std::vector<double> QueueModel::breakpoints() const {
    return merged_breakpoints(reshape_.breakpoints(), service_.breakpoints(), service_.r_max());
}

double eval_F(const ReshapeFunction& reshape, double r) { return reshape.integral(r); }

double eval_H(const ReshapeFunction& reshape, double s) { return reshape.inverse_integral(s); }

double expect_closed_form(const PiecewisePoly& h, const ServiceDistribution& service) {
    if (!service.has_closed_form()) throw DomainError("closed form unavailable for this service law");
    return expect_closed_form_impl(h, service.pieces());
}

double expect_quadrature(const numerics::RealFn& h, std::span<const double> h_breakpoints,
                         const ServiceDistribution& service, const numerics::Quadrature& q) {
    const auto bps = merged_breakpoints(h_breakpoints, service.breakpoints(), service.r_max());
    return numerics::integrate([&](double r) { return h(r) * service.pdf(r); }, 0.0, service.r_max(), bps, q).value;
}

double nu_bar(const QueueModel& model, Route route) {
    return moment(model.reshape().cumulative(), model.service(), model.reshape().breakpoints(), route);
}

double nu_bar_by_parts(const QueueModel& model) {
    const auto& f = model.reshape();
    const auto& s = model.service();
    return numerics::integrate([&](double r) { return f(r) * s.tail(r); }, 0.0, s.r_max(), model.breakpoints(),
                               numerics::Quadrature::precise())
        .value;
}

double reshaped_second_moment(const QueueModel& model, Route route) {
    const auto& F = model.reshape().cumulative();
    return moment(F * F, model.service(), model.reshape().breakpoints(), route);
}

double waiting_first_term(const QueueModel& model, Route route) {
    if (model.lambda0() == 0.0) return 0.0;
    return model.lambda0() *
           moment(model.reshape().first_moment(), model.service(), model.reshape().breakpoints(), route);
}

bool rate_preserving(const QueueModel& model, double tol) {
    if (!(tol > 0.0)) throw DomainError("rate_preserving: tol must be positive");
    return std::abs(model.nu() - model.nu_bar()) <= tol * std::max(model.nu(), 1.0);
}

QueueModel time_changed_model(const QueueModel& model) {
    return QueueModel(model.lambda0(), ReshapeFunction::constant(1.0),
                      ServiceDistribution::time_changed(model.service(), model.reshape()));
}

double time_change_density(const QueueModel& model, double s) {
    if (!model.reshape().increasing_on(model.service().r_max()))
        throw NotInvertibleError("time change needs F strictly increasing on the support of the service law");
    if (s < 0.0) throw DomainError("time_change_density: s must be >= 0");
    const double r = model.reshape().inverse_integral(s);
    const double g = model.service().pdf(r);
    const double f = model.reshape()(r);
    if (f == 0.0) return g == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return g / f;
}

}  // namespace rmg1
