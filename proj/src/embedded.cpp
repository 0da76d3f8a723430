#include "rmg1/embedded.hpp"

#include "rmg1/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rmg1 {

namespace {

double poisson_pmf(std::size_t j, double mean) {
    if (mean <= 0.0) return j == 0 ? 1.0 : 0.0;
    const double jd = static_cast<double>(j);
    return std::exp(jd * std::log(mean) - mean - std::lgamma(jd + 1.0));
}

// P(Poisson(mean) > j).
double poisson_upper(std::size_t j, double mean) {
    if (mean <= 0.0) return 0.0;
    return boost::math::gamma_p(static_cast<double>(j) + 1.0, mean);
}

std::size_t poisson_truncation(double mean, double eps) {
    std::size_t j = static_cast<std::size_t>(mean);
    if (mean <= 0.0) return 0;
    while (poisson_upper(j, mean) >= eps) ++j;
    // Step back while the bound still holds, so J is the smallest such value.
    while (j > 0 && poisson_upper(j - 1, mean) < eps) --j;
    return j;
}

void require_stable(const QueueModel& model) {
    if (!model.stable()) throw InstabilityError(model.rho());
}

}  // namespace

InstabilityError::InstabilityError(double rho)
    : std::runtime_error([rho] {
          std::ostringstream msg;
          msg << "unstable system: rho = " << rho << " >= 1";
          return msg.str();
      }()),
      rho_(rho) {}

double IncrementPmf::tail_above(std::size_t j) const {
    numerics::CompensatedSum s;
    s.add(tail_mass);
    for (std::size_t i = p.size(); i-- > j + 1;) s.add(p[i]);
    return s.value();
}

IncrementPmf increment_pmf(const QueueModel& model, double eps_tail) {
    if (!(eps_tail > 0.0 && eps_tail <= 1e-3)) throw DomainError("increment_pmf: eps_tail must lie in (0, 1e-3]");
    const double lambda = model.lambda0();
    const auto& reshape = model.reshape();
    const auto& service = model.service();
    IncrementPmf out;
    if (lambda == 0.0 || reshape.sup() == 0.0) {
        out.p = {1.0};
        return out;
    }
    const double r_max = service.r_max();
    const auto bps = model.breakpoints();
    out.truncation = poisson_truncation(lambda * reshape.integral(r_max), eps_tail);
    out.p.resize(out.truncation + 1);
    const auto q = numerics::Quadrature::precise();
    for (std::size_t j = 0; j <= out.truncation; ++j) {
        auto integrand = [&](double r) { return poisson_pmf(j, lambda * reshape.integral(r)) * service.pdf(r); };
        out.p[j] = numerics::integrate(integrand, 0.0, r_max, bps, q).value;
    }
    auto upper = [&](double r) { return poisson_upper(out.truncation, lambda * reshape.integral(r)) * service.pdf(r); };
    out.tail_mass = numerics::integrate(upper, 0.0, r_max, bps, q).value + service.tail(r_max);
    return out;
}

EmbeddedSolution stationary_q(const IncrementPmf& pmf, const QueueModel& model, double eps_tail) {
    require_stable(model);
    EmbeddedSolution sol;
    sol.rho = model.rho();
    sol.mean_completions = mean_at_completions(model);
    const double q0 = 1.0 - sol.rho;
    sol.q.push_back(q0);

    const double p0 = pmf.p.at(0);
    if (!(p0 > 0.0)) throw NumericsError("stationary_q: p(0) must be positive");
    const std::size_t J = pmf.truncation;
    if (J == 0) {
        // No arrivals during service: the queue empties at every completion.
        sol.q.push_back(0.0);
        sol.truncation = 1;
        return sol;
    }

    // p_bar(m) for m < J; zero beyond the band.
    std::vector<double> pbar(J, 0.0);
    {
        numerics::CompensatedSum s;
        s.add(pmf.tail_mass);
        for (std::size_t m = J; m-- > 0;) {
            s.add(pmf.p[m + 1]);
            pbar[m] = s.value();
        }
    }

    constexpr std::size_t kMaxLevels = 2'000'000;
    for (std::size_t j = 1;; ++j) {
        numerics::CompensatedSum s;
        if (j - 1 < J) s.add(q0 * pbar[j - 1]);
        const std::size_t first = j > J ? j - J + 1 : 1;
        for (std::size_t i = first; i < j; ++i) s.add(sol.q[i] * pbar[j - i]);
        const double qj = s.value() / p0;
        sol.q.push_back(qj);

        const double prev = sol.q[j - 1];
        const double ratio = prev > 0.0 ? qj / prev : 0.0;
        if (qj == 0.0 || (ratio < 1.0 && qj < eps_tail * (1.0 - ratio))) {
            sol.truncation = j;
            sol.tail_estimate = qj == 0.0 ? 0.0 : qj * ratio / (1.0 - ratio);
            break;
        }
        if (j >= kMaxLevels) throw NumericsError("stationary_q: queue-length tail did not decay", qj, 0.0);
    }
    return sol;
}

EmbeddedSolution solve_embedded(const QueueModel& model, double eps_tail) {
    require_stable(model);
    return stationary_q(increment_pmf(model, eps_tail), model, eps_tail);
}

double mean_at_completions(const QueueModel& model) {
    require_stable(model);
    const double lambda = model.lambda0();
    if (lambda == 0.0) return 0.0;
    const double rho = model.rho();
    return rho + lambda * lambda * reshaped_second_moment(model) / (2.0 * (1.0 - rho));
}

double stationary_mgf(const QueueModel& model, double s) {
    require_stable(model);
    if (!std::isfinite(s)) throw DomainError("stationary_mgf: s must be finite");
    if (s == 0.0) return 1.0;
    const double lambda = model.lambda0();
    if (lambda == 0.0) return 1.0;

    const auto& reshape = model.reshape();
    const auto& service = model.service();
    const double one_minus_z = -std::expm1(s);
    const double kappa = lambda * one_minus_z;  // < 0 for s > 0

    // psi - 1 = E[expm1(-kappa F(sigma))], split at `cut` when the tail is done in closed form.
    double cut = service.r_max();
    double tail_part = 0.0;
    if (s > 0.0 && !service.bounded_support()) {
        if (!service.has_closed_form())
            throw DomainError("stationary_mgf: s > 0 needs a bounded or closed-form service law");
        const auto pieces = service.pieces();
        const auto& last = pieces.back();
        const double slope = reshape(reshape.support_hint());
        const double rate = last.decay + kappa * slope;
        if (!(std::isinf(last.hi) && last.decay > 0.0) || !(rate > 0.0))
            throw DomainError("stationary_mgf: transform diverges at this s");
        cut = std::max(last.lo, reshape.support_hint());
        const double shift = -kappa * (reshape.integral(cut) - slope * cut);
        tail_part = std::exp(shift) * integrate_exp_poly(last.poly, rate, cut, std::numeric_limits<double>::infinity()) -
                    service.tail(cut);
    }
    auto integrand = [&](double r) { return std::expm1(-kappa * reshape.integral(r)) * service.pdf(r); };
    const double head =
        cut > 0.0 ? numerics::integrate(integrand, 0.0, cut, model.breakpoints(), numerics::Quadrature::precise()).value
                  : 0.0;
    const double psi_minus_1 = head + tail_part;
    const double psi = 1.0 + psi_minus_1;
    const double denom = psi_minus_1 + one_minus_z;  // psi - z, same sign as 1 - z inside the domain
    const double value = (1.0 - model.rho()) * one_minus_z * psi / denom;
    if (!std::isfinite(value) || !(value > 0.0) || (s > 0.0) != (denom < 0.0))
        throw DomainError("stationary_mgf: transform diverges at this s");
    return value;
}

double balance_residual(const EmbeddedSolution& sol, const IncrementPmf& pmf) {
    const auto& q = sol.q;
    const auto& p = pmf.p;
    auto pj = [&](std::size_t j) { return j < p.size() ? p[j] : 0.0; };
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < q.size(); ++j) {
        numerics::CompensatedSum s;
        s.add(q[0] * pj(j));
        const std::size_t first = j + 1 >= p.size() ? j + 2 - p.size() : 1;
        for (std::size_t i = std::max<std::size_t>(first, 1); i <= j + 1; ++i) s.add(q[i] * pj(j + 1 - i));
        worst = std::max(worst, std::abs(q[j] - s.value()));
    }
    return worst;
}

}  // namespace rmg1
