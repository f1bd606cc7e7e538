// Model-based baselines: Neyman-Pearson power detector, LS-ESPRIT angle
// estimator (maximal-overlap subarrays, rank-one signal subspace), the
// angle-variance lower bound, MMSE equalizer, exact soft demapper and a
// bitwise mutual-information estimator.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "jcas/complex_matrix.hpp"
#include "jcas/constellation.hpp"
#include "jcas/error.hpp"
#include "jcas/hermitian_eig.hpp"
#include "jcas/special.hpp"

namespace jcas {

struct DetectionDecision {
    bool detected = false;
    double statistic = 0.0;
    double threshold = 0.0;
};

// Power detector: 2/sigma^2 * sum |z|^2 against the chi-square quantile with
// 2*K*N degrees of freedom.  Boundary convention: >= detects.
inline DetectionDecision np_detect(const ComplexMatrix& z, double noise_power,
                                   double false_alarm_rate) {
    if (!(noise_power > 0.0)) throw DomainError("np_detect: noise power must be > 0");
    if (!(false_alarm_rate > 0.0 && false_alarm_rate < 1.0))
        throw DomainError("np_detect: false-alarm rate must lie in (0,1)");
    if (z.rows() == 0 || z.cols() == 0) throw DomainError("np_detect: empty observation");

    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) acc += std::norm(z.data()[i]);
    DetectionDecision d;
    d.statistic = 2.0 / noise_power * acc;
    d.threshold = chi2_quantile(2 * z.rows() * z.cols(), 1.0 - false_alarm_rate);
    d.detected = d.statistic >= d.threshold;
    return d;
}

struct EspritEstimate {
    double angle = 0.0;     // radians in [-pi/2, pi/2]
    double dominance = 0.0; // lambda_1 / lambda_2
    bool confident = false; // dominance >= 1 + 1e-6
};

// LS-ESPRIT on the dominant eigenvector of the autocorrelation: the two
// maximal-overlap subarrays (entries 1..K-1 and 2..K) differ by one phase
// step psi, fitted in least squares.
inline EspritEstimate esprit_aoa(const ComplexMatrix& corr) {
    if (corr.rows() != corr.cols() || corr.rows() < 2)
        throw DomainError("esprit_aoa: need a square correlation with K >= 2");
    const double scale = frobenius_norm(corr);
    if (scale == 0.0) throw EstimationError("esprit_aoa: zero correlation matrix");

    const auto eig = hermitian_eig(corr);
    const std::size_t k = corr.rows();
    std::vector<cplx> u(k);
    for (std::size_t i = 0; i < k; ++i) u[i] = eig.eigenvectors(i, 0);

    const std::span<const cplx> head(u.data(), k - 1);
    const std::span<const cplx> tail(u.data() + 1, k - 1);
    // A degenerate fit (pure-noise eigenvector) still yields an in-range
    // angle; the dominance flag below marks it as unreliable.
    const bool fit_defined = norm2(head) > 0.0;
    const cplx psi = fit_defined ? least_squares_1d(head, tail) : cplx{};

    EspritEstimate out;
    const double s = std::arg(psi) / std::numbers::pi; // arg(0) = 0
    out.angle = std::asin(std::clamp(s, -1.0, 1.0));
    const double lam2 = eig.eigenvalues.size() > 1 ? eig.eigenvalues[1] : 0.0;
    out.dominance = eig.eigenvalues[0] / std::max(lam2, 1e-300 * std::max(eig.eigenvalues[0], 1.0));
    out.confident = std::isfinite(out.dominance) && out.dominance >= 1.0 + 1e-6;
    return out;
}

struct CrbInputs {
    double angle = 0.0;        // theta, radians
    double noise_power = 1.0;  // sigma_ns^2
    double reflect_power = 1.0;// sigma_s^2
    double beam_gain = 1.0;    // beta = |a^T v|^2
    std::size_t n_antennas = 2;
    std::size_t window_len = 1;
};

// The published bound carries a sigma_s^3 denominator; the dimensionally
// conventional sigma_s^4 form is available for sensitivity checks only.
enum class CrbVariant { published, conventional };

inline double crb(const CrbInputs& in, CrbVariant variant = CrbVariant::published) {
    if (!(in.noise_power > 0.0 && in.reflect_power > 0.0 && in.beam_gain > 0.0))
        throw DomainError("crb: powers and gain must be > 0");
    if (in.n_antennas < 2) throw DomainError("crb: need at least two antennas");
    if (in.window_len < 1) throw DomainError("crb: window must be non-empty");
    if (!(std::abs(in.angle) < std::numbers::pi / 2.0))
        throw DomainError("crb: bound is singular at endfire (cos theta = 0)");

    const double k = static_cast<double>(in.n_antennas);
    const double n = static_cast<double>(in.window_len);
    const double c2 = std::cos(in.angle) * std::cos(in.angle);
    const double sigma_s = std::sqrt(in.reflect_power);
    const double s_pow = (variant == CrbVariant::published)
                             ? in.reflect_power * sigma_s  // sigma_s^3, verbatim
                             : in.reflect_power * in.reflect_power;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return (1.0 / (pi2 * c2)) * (in.noise_power / (2.0 * n)) *
           ((in.noise_power + k * in.beam_gain * in.reflect_power) /
            (k * in.beam_gain * in.beam_gain * s_pow)) *
           (6.0 / (0.5 * k * k * k - 0.5 * k));
}

// Scalar MMSE estimate of x from z = kappa x + n at unit symbol energy.
inline cplx mmse_equalize(cplx z, cplx channel_gain, double noise_power) {
    if (!(noise_power >= 0.0)) throw DomainError("mmse_equalize: negative noise power");
    const double den = std::norm(channel_gain) + noise_power;
    if (den == 0.0) return cplx{};
    return std::conj(channel_gain) * z / den;
}

// Exact log-MAP bitwise LLRs, computed on the pre-equalization model
// z = kappa x + n.  The equalized input is mapped back to z first; kappa = 0
// carries no information and yields all-zero LLRs.  Positive LLR <=> bit 0.
inline std::vector<double> exact_llr(cplx equalized, cplx channel_gain, double noise_power,
                                     const Constellation& c) {
    if (!(noise_power > 0.0)) throw DomainError("exact_llr: noise power must be > 0");
    if (c.order == 0) throw DomainError("exact_llr: empty constellation");
    std::vector<double> llr(c.bits_per_symbol, 0.0);
    if (channel_gain == cplx{}) return llr;

    const double den = std::norm(channel_gain) + noise_power;
    const cplx z = equalized * den / std::conj(channel_gain);

    // Metrics -|z - kappa p|^2 / sigma^2 for every constellation point.
    std::vector<double> metric(c.order);
    for (std::size_t i = 0; i < c.order; ++i)
        metric[i] = -std::norm(z - channel_gain * c.points[i]) / noise_power;

    for (std::size_t b = 0; b < c.bits_per_symbol; ++b) {
        double m0 = -1e308, m1 = -1e308;
        for (std::size_t i = 0; i < c.order; ++i) {
            const bool bit = (i >> (c.bits_per_symbol - 1 - b)) & 1u;
            (bit ? m1 : m0) = std::max(bit ? m1 : m0, metric[i]);
        }
        double s0 = 0.0, s1 = 0.0;
        for (std::size_t i = 0; i < c.order; ++i) {
            const bool bit = (i >> (c.bits_per_symbol - 1 - b)) & 1u;
            if (bit)
                s1 += std::exp(metric[i] - m1);
            else
                s0 += std::exp(metric[i] - m0);
        }
        llr[b] = (m0 + std::log(s0)) - (m1 + std::log(s1));
    }
    return llr;
}

// Bitwise mutual information of a soft demapper output:
// n - (1/N) sum log2(1 + exp(-(1-2b) L)), clamped to [0, n].
// Layout: symbol-major, bits_per_symbol entries per symbol.
inline double bmi_estimate(std::span<const double> llrs, std::span<const std::uint8_t> bits,
                           std::size_t bits_per_symbol) {
    if (bits_per_symbol == 0) throw DomainError("bmi_estimate: zero bits per symbol");
    if (llrs.size() != bits.size() || llrs.empty())
        throw DomainError("bmi_estimate: shape mismatch");
    if (llrs.size() % bits_per_symbol != 0)
        throw DomainError("bmi_estimate: size not a multiple of bits per symbol");

    const double n_sym = static_cast<double>(llrs.size() / bits_per_symbol);
    double acc = 0.0;
    for (std::size_t i = 0; i < llrs.size(); ++i) {
        if (bits[i] > 1) throw DomainError("bmi_estimate: bits must be 0/1");
        const double s = bits[i] ? -1.0 : 1.0;
        const double t = -s * llrs[i];
        // log2(1 + exp(t)), overflow-safe.
        const double soft = (t > 40.0) ? t : std::log1p(std::exp(t));
        acc += soft / std::numbers::ln2;
    }
    const double n_bits = static_cast<double>(bits_per_symbol);
    const double bmi = n_bits - acc / n_sym;
    return std::clamp(bmi, 0.0, n_bits);
}

} // namespace jcas
