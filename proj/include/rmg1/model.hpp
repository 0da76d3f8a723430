#pragma once

#include "rmg1/numerics.hpp"
#include "rmg1/piecewise.hpp"

#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace rmg1 {

enum class ReshapeFamily { constant, linear, window, tabulated };
std::string_view to_string(ReshapeFamily family);

/// The reshaping function f >= 0 that modulates the arrival rate lambda0 f(r)
/// by the remaining service time r, together with F(r) = int_0^r f and its
/// inverse H where F is strictly increasing.
///
/// Every family is piecewise linear in r, so F is piecewise quadratic and is
/// evaluated exactly. Past support_hint() f is constant.
class ReshapeFunction {
public:
    static ReshapeFunction constant(double value = 1.0);
    /// f(r) = a + b r on [0, end), `beyond` afterwards.
    static ReshapeFunction linear(double a, double b, double end, double beyond = 0.0);
    /// f(r) = height on [0, t), 0 afterwards. t may be +inf.
    static ReshapeFunction window(double t, double height);
    /// Window normalized so that nu_bar = nu for exponential(1) service: height = 1 / (1 - e^-t).
    static ReshapeFunction window(double t);
    /// Piecewise-linear interpolation of (breakpoints, values), constant at the
    /// last value past the last breakpoint. breakpoints[0] must be 0.
    static ReshapeFunction tabulated(std::vector<double> breakpoints, std::vector<double> values);

    ReshapeFamily family() const { return family_; }

    double operator()(double r) const;
    /// F(r). Throws DomainError for r < 0.
    double integral(double r) const;
    /// H(s), the r with F(r) = s. Throws DomainError when s is outside
    /// [0, F(inf)) and NotInvertibleError when f vanishes on the preimage.
    double inverse_integral(double s) const;
    /// lim F(r) as r -> inf (+inf unless f is eventually 0).
    double integral_limit() const;
    /// max f, the thinning envelope.
    double sup() const { return sup_; }
    double support_hint() const { return support_hint_; }
    /// f > 0 everywhere on [0, r_end).
    bool positive_on(double r_end) const;
    /// f > 0 on [0, r_end) except at isolated points, so F is strictly increasing there.
    bool increasing_on(double r_end) const;
    /// Finite points where f may fail to be smooth.
    std::span<const double> breakpoints() const { return breakpoints_; }

    const PiecewisePoly& density() const { return f_; }
    const PiecewisePoly& cumulative() const { return F_; }
    /// U(x) = int_0^x u f(u) du.
    const PiecewisePoly& first_moment() const { return U_; }

private:
    ReshapeFunction(ReshapeFamily family, PiecewisePoly f);

    ReshapeFamily family_;
    PiecewisePoly f_;
    PiecewisePoly F_;
    PiecewisePoly U_;
    std::vector<double> breakpoints_;
    double sup_ = 0.0;
    double support_hint_ = 0.0;
};

enum class ServiceFamily { exponential, uniform, tabulated, time_changed };
std::string_view to_string(ServiceFamily family);

/// iid service-time law with density g, tail G(r) = P(sigma > r) and mean nu.
///
/// All improper integrals are truncated at r_max(), where G(r_max) < 1e-12.
class ServiceDistribution {
public:
    static ServiceDistribution exponential(double mean);
    static ServiceDistribution uniform(double a, double b);
    /// Piecewise-linear density through (breakpoints, values), zero past the
    /// last breakpoint. Values are rescaled to unit mass.
    static ServiceDistribution tabulated(std::vector<double> breakpoints, std::vector<double> values);
    /// Law of F(sigma): density g(H(s)) / f(H(s)). Needs f > 0 on the support of g.
    static ServiceDistribution time_changed(const ServiceDistribution& base, const ReshapeFunction& reshape);

    ServiceFamily family() const { return family_; }

    double pdf(double r) const;
    double tail(double r) const;
    double cdf(double r) const { return 1.0 - tail(r); }
    /// Inverse cdf for u in [0, 1).
    double quantile(double u) const;
    double mean() const { return mean_; }
    double r_max() const { return r_max_; }
    bool bounded_support() const { return bounded_; }
    std::span<const double> breakpoints() const { return breakpoints_; }

    /// Closed-form pieces, empty for time-changed laws.
    std::span<const DensityPiece> pieces() const { return pieces_; }
    bool has_closed_form() const { return !pieces_.empty(); }

private:
    ServiceDistribution() = default;
    void finish_pieces();

    ServiceFamily family_ = ServiceFamily::exponential;
    std::vector<DensityPiece> pieces_;
    std::vector<double> tail_at_;  // G at pieces_[i].lo
    std::vector<double> breakpoints_;
    double mean_ = 0.0;
    double r_max_ = 0.0;
    bool bounded_ = false;
    // time_changed only
    std::shared_ptr<const ServiceDistribution> base_;
    std::shared_ptr<const ReshapeFunction> reshape_;
};

/// lambda0 plus the reshape and service laws: a complete rM/G/1 system.
class QueueModel {
public:
    QueueModel(double lambda0, ReshapeFunction reshape, ServiceDistribution service);

    double lambda0() const { return lambda0_; }
    const ReshapeFunction& reshape() const { return reshape_; }
    const ServiceDistribution& service() const { return service_; }

    double nu() const { return service_.mean(); }
    double nu_bar() const { return nu_bar_; }
    double rho() const { return lambda0_ * nu_bar_; }
    bool stable() const { return rho() < 1.0; }
    /// All breakpoints of f and g below r_max, sorted.
    std::vector<double> breakpoints() const;

private:
    double lambda0_;
    ReshapeFunction reshape_;
    ServiceDistribution service_;
    double nu_bar_;
};

/// How a moment is evaluated. `automatic` picks the closed form when the
/// service law has one.
enum class Route { automatic, closed_form, quadrature };

double eval_F(const ReshapeFunction& reshape, double r);
double eval_H(const ReshapeFunction& reshape, double s);

/// nu_bar = E[F(sigma)].
double nu_bar(const QueueModel& model, Route route = Route::automatic);
/// nu_bar as int f(r) G(r) dr (integration by parts form).
double nu_bar_by_parts(const QueueModel& model);
/// E[F(sigma)^2].
double reshaped_second_moment(const QueueModel& model, Route route = Route::automatic);
/// lambda0 * E[U(sigma)], U(x) = int_0^x u f(u) du.
double waiting_first_term(const QueueModel& model, Route route = Route::automatic);
/// |nu - nu_bar| <= tol * max(nu, 1).
bool rate_preserving(const QueueModel& model, double tol = 1e-8);

/// E[h(sigma)] for a piecewise polynomial h, exactly.
double expect_closed_form(const PiecewisePoly& h, const ServiceDistribution& service);
/// E[h(sigma)] by adaptive quadrature up to r_max.
double expect_quadrature(const numerics::RealFn& h, std::span<const double> h_breakpoints,
                         const ServiceDistribution& service,
                         const numerics::Quadrature& q = numerics::Quadrature::precise());

/// The M/G/1 system (lambda0, g_bar) obtained by the time change s = F(r).
QueueModel time_changed_model(const QueueModel& model);
/// g_bar(s) = g(H(s)) / f(H(s)); +inf where f(H(s)) = 0 at an isolated point.
double time_change_density(const QueueModel& model, double s);

}  // namespace rmg1
