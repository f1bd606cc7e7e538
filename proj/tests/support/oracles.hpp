// Independent reference implementations used only by the tests.  Everything
// here is computed by a different route than the library (quadrature instead
// of incomplete-gamma series, closed forms, brute-force enumeration,
// extended-precision naive sums) so agreement is meaningful.
#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace oracle {

// ---- composite 10-point Gauss-Legendre quadrature ------------------------

inline double gauss_legendre(double lo, double hi, int panels, const auto& f) {
    static const double node[5] = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                   0.8650633666889845, 0.9739065285171717};
    static const double wght[5] = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                   0.1494513491505806, 0.0666713443086881};
    double acc = 0.0;
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double c = lo + (p + 0.5) * h;
        const double r = 0.5 * h;
        double s = 0.0;
        for (int i = 0; i < 5; ++i) s += wght[i] * (f(c - r * node[i]) + f(c + r * node[i]));
        acc += s * r;
    }
    return acc;
}

// ---- chi-square CDF / quantile via quadrature -----------------------------

// CDF integrated after the substitution t = u^2, which removes the endpoint
// singularity for dof = 1 and keeps the integrand smooth for all dof.
inline double chi2_cdf(std::size_t dof, double t) {
    if (t <= 0.0) return 0.0;
    const double a = 0.5 * static_cast<double>(dof);
    const double lognorm = -a * std::log(2.0) - std::lgamma(a);
    const auto g = [&](double u) {
        // 2u * pdf(u^2) = 2 * u^(2a-1) * exp(-u^2/2) / (2^a Gamma(a))
        return 2.0 * std::exp((2.0 * a - 1.0) * std::log(u) - 0.5 * u * u + lognorm);
    };
    return gauss_legendre(1e-12, std::sqrt(t), 600, g);
}

inline double chi2_quantile(std::size_t dof, double p) {
    const double d = static_cast<double>(dof);
    double lo = 0.0;
    double hi = d + 12.0 * std::sqrt(2.0 * d) + 12.0;
    while (chi2_cdf(dof, hi) < p) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * std::max(1.0, lo); ++it) {
        const double mid = 0.5 * (lo + hi);
        (chi2_cdf(dof, mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---- 2x2 Hermitian eigendecomposition, closed form ------------------------

struct Eig2 {
    double l1, l2;                 // descending
    std::complex<double> v1[2], v2[2]; // unit-norm eigenvectors
};

inline Eig2 eig2x2(double a11, std::complex<double> a12, double a22) {
    Eig2 out{};
    const double tr = a11 + a22;
    const double det = a11 * a22 - std::norm(a12);
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
    out.l1 = 0.5 * (tr + disc);
    out.l2 = 0.5 * (tr - disc);
    const auto fill = [&](double lam, std::complex<double>* v) {
        if (std::abs(a12) > 0.0) {
            std::complex<double> x = a12;
            std::complex<double> y = lam - a11;
            const double n = std::sqrt(std::norm(x) + std::norm(y));
            v[0] = x / n;
            v[1] = y / n;
        } else {
            const bool first = std::abs(lam - a11) <= std::abs(lam - a22);
            v[0] = first ? 1.0 : 0.0;
            v[1] = first ? 0.0 : 1.0;
        }
    };
    fill(out.l1, out.v1);
    fill(out.l2, out.v2);
    return out;
}

// ---- exact BER of Gray-labelled square QAM over AWGN ----------------------

// Per-axis enumeration: transition probabilities between amplitude levels
// under nearest-level decisions, weighted by the Hamming distance of the
// reflected-Gray labels.  es_over_n0 is the linear symbol SNR at unit symbol
// energy.
inline double qam_ber_awgn(std::size_t order, double es_over_n0) {
    std::size_t nbits = 0;
    while ((std::size_t{1} << nbits) < order) ++nbits;
    const std::size_t levels = std::size_t{1} << (nbits / 2);
    const double delta =
        std::sqrt(3.0 / (2.0 * (static_cast<double>(levels * levels) - 1.0)));
    const double sigma_axis = std::sqrt(0.5 / es_over_n0); // per-axis noise std
    const auto amp = [&](std::size_t l) {
        return (2.0 * static_cast<double>(l) - static_cast<double>(levels - 1)) * delta;
    };
    const auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    const auto gray = [](std::size_t v) { return v ^ (v >> 1); };

    double err = 0.0;
    for (std::size_t l = 0; l < levels; ++l) {
        for (std::size_t m = 0; m < levels; ++m) {
            const double b_lo = (m == 0) ? -1e30 : 0.5 * (amp(m - 1) + amp(m));
            const double b_hi = (m + 1 == levels) ? 1e30 : 0.5 * (amp(m) + amp(m + 1));
            const double prob =
                phi((b_hi - amp(l)) / sigma_axis) - phi((b_lo - amp(l)) / sigma_axis);
            err += prob * static_cast<double>(std::popcount(gray(l) ^ gray(m)));
        }
    }
    const double bits_per_axis = static_cast<double>(nbits / 2);
    return err / (static_cast<double>(levels) * bits_per_axis);
}

// ---- bit-wise LLRs by naive extended-precision summation -------------------

// Likelihood model z = gain * point + CN(0, noise_power).  `labels[i]` is the
// integer bit label of points[i], MSB = first bit.  Natural-log LLR with the
// convention positive <=> bit 0.
inline std::vector<double> llr_brute(std::complex<double> z, std::complex<double> gain,
                                     double noise_power,
                                     std::span<const std::complex<double>> points,
                                     std::span<const std::uint32_t> labels,
                                     std::size_t bits_per_symbol) {
    std::vector<double> out(bits_per_symbol);
    for (std::size_t b = 0; b < bits_per_symbol; ++b) {
        long double num = 0.0L, den = 0.0L;
        for (std::size_t i = 0; i < points.size(); ++i) {
            const std::complex<double> d = z - gain * points[i];
            const long double w = expl(-static_cast<long double>(std::norm(d)) / noise_power);
            const bool bit = (labels[i] >> (bits_per_symbol - 1 - b)) & 1u;
            (bit ? den : num) += w;
        }
        out[b] = static_cast<double>(logl(num) - logl(den));
    }
    return out;
}

// ---- mutual-information of a consistent Gaussian LLR by quadrature --------

// L | bit=0 ~ N(m, 2m).  Returns 1 - E[log2(1 + exp(-L))].
inline double gaussian_llr_bmi(double m) {
    const double sd = std::sqrt(2.0 * m);
    const auto f = [&](double l) {
        const double z = (l - m) / sd;
        const double pdf = std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * 3.14159265358979323846));
        const double softplus = (l > 40.0) ? std::exp(-l) : std::log1p(std::exp(-l));
        return pdf * softplus / std::log(2.0);
    };
    return 1.0 - gauss_legendre(m - 14.0 * sd, m + 14.0 * sd, 400, f);
}

} // namespace oracle
