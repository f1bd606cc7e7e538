// Special functions: regularized incomplete gamma and the chi-square
// CDF/quantile built on it.  Series for x < a+1, Lentz continued fraction
// otherwise; the quantile solves the better-conditioned tail (lower CDF for
// p <= 1/2, upper tail otherwise) by bracketed bisection with a Newton polish.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

#include "jcas/error.hpp"

namespace jcas {

namespace detail {

// Regularized lower incomplete gamma P(a,x) via its power series (x < a+1).
inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a,x) via modified Lentz continued
// fraction (x >= a+1).
inline double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace detail

// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a).
inline double gamma_p(double a, double x) {
    if (!(a > 0.0)) throw DomainError("gamma_p: shape must be positive");
    if (!(x >= 0.0)) throw DomainError("gamma_p: x must be non-negative");
    if (x == 0.0) return 0.0;
    return (x < a + 1.0) ? detail::gamma_p_series(a, x) : 1.0 - detail::gamma_q_cf(a, x);
}

// Regularized upper incomplete gamma Q(a,x) = 1 - P(a,x).
inline double gamma_q(double a, double x) {
    if (!(a > 0.0)) throw DomainError("gamma_q: shape must be positive");
    if (!(x >= 0.0)) throw DomainError("gamma_q: x must be non-negative");
    if (x == 0.0) return 1.0;
    return (x < a + 1.0) ? 1.0 - detail::gamma_p_series(a, x) : detail::gamma_q_cf(a, x);
}

inline double chi2_cdf(std::size_t dof, double x) {
    if (dof == 0) throw DomainError("chi2_cdf: dof must be positive");
    if (!(x >= 0.0)) throw DomainError("chi2_cdf: x must be non-negative");
    return gamma_p(0.5 * static_cast<double>(dof), 0.5 * x);
}

// Quantile of the chi-square law with `dof` degrees of freedom.
// Valid for p in [0,1); p = 0 maps to 0.
inline double chi2_quantile(std::size_t dof, double p) {
    if (dof == 0) throw DomainError("chi2_quantile: dof must be positive");
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("chi2_quantile: p must lie in [0,1)");
    if (p == 0.0) return 0.0;

    const double a = 0.5 * static_cast<double>(dof);
    const double q = 1.0 - p; // exact when p is representable; used for upper tail
    // Residual evaluated on the tail with the better relative conditioning.
    const auto residual = [&](double t) {
        return (p <= 0.5) ? gamma_p(a, 0.5 * t) - p : q - gamma_q(a, 0.5 * t);
    };

    // Bracket: the mean +- a generous multiple of the standard deviation.
    const double d = static_cast<double>(dof);
    double lo = 0.0;
    double hi = d + 10.0 * std::sqrt(2.0 * d) + 10.0;
    while (residual(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw NumericalError("chi2_quantile: failed to bracket");
    }

    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * std::max(1.0, lo); ++it) {
        const double mid = 0.5 * (lo + hi);
        (residual(mid) < 0.0 ? lo : hi) = mid;
    }
    double t = 0.5 * (lo + hi);

    // Newton polish with the analytic density; stays inside the bracket.
    for (int it = 0; it < 4; ++it) {
        const double logpdf = (a - 1.0) * std::log(t) - 0.5 * t - std::lgamma(a) - a * std::log(2.0);
        const double pdf = std::exp(logpdf);
        if (!(pdf > 0.0) || !std::isfinite(pdf)) break;
        const double step = residual(t) / pdf;
        const double next = t - step;
        if (!(next > lo && next < hi)) break;
        t = next;
        if (std::abs(step) < 1e-15 * std::max(1.0, t)) break;
    }
    return t;
}

} // namespace jcas
