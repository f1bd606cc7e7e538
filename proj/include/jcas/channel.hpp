// Stochastic links: Rayleigh-faded downlink with a single receive antenna,
// and a monostatic sensing return with a Swerling-1 target.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "jcas/beam.hpp"
#include "jcas/complex_matrix.hpp"
#include "jcas/error.hpp"
#include "jcas/rng.hpp"

namespace jcas {

struct CommLinkParams {
    double fading_power = 1.0;  // E|alpha_c|^2
    double noise_power = 1.0;   // E|n|^2
    AngleRegion receiver_region; // user azimuth support

    void validate() const {
        if (!(fading_power > 0.0)) throw DomainError("CommLinkParams: fading_power must be > 0");
        if (!(noise_power >= 0.0)) throw DomainError("CommLinkParams: noise_power must be >= 0");
    }
};

struct SenseLinkParams {
    double reflect_power = 1.0; // E|alpha_s|^2 when a target exists
    double noise_power = 1.0;   // E|N_kn|^2
    AngleRegion target_region;  // target azimuth support
    double target_prior = 0.5;  // P(T = 1)

    void validate() const {
        if (!(reflect_power > 0.0)) throw DomainError("SenseLinkParams: reflect_power must be > 0");
        if (!(noise_power >= 0.0)) throw DomainError("SenseLinkParams: noise_power must be >= 0");
        if (!(target_prior >= 0.0 && target_prior <= 1.0))
            throw DomainError("SenseLinkParams: target_prior outside [0,1]");
    }
};

// One sensing hypothesis draw: presence flag, azimuth, per-symbol reflection
// gains (unused when no target is present).
struct SensingScene {
    bool target_present = false;
    double angle = 0.0;
    std::vector<cplx> gains;
};

// Per-symbol downlink randomness, kept for equalisation and diagnostics:
// kappa_n = (a(phi_n)^T v) * alpha_n is the end-to-end complex gain.
struct CommRealization {
    std::vector<double> angles;
    std::vector<cplx> fading;
    std::vector<cplx> gains;
};

enum class AngleHold { per_symbol, per_window };

inline SensingScene sample_scene(const SenseLinkParams& p, std::size_t window_len,
                                 SeededRng& rng) {
    p.validate();
    if (window_len == 0) throw DomainError("sample_scene: empty window");
    SensingScene s;
    s.target_present = rng.bernoulli(p.target_prior);
    s.angle = rng.uniform(p.target_region.lo, p.target_region.hi);
    s.gains.resize(window_len);
    for (cplx& g : s.gains) g = rng.complex_normal(p.reflect_power);
    return s;
}

// Downlink: z_n = (a(phi_n)^T y_n) alpha_n + w_n with y = v x^T, so the
// effective per-symbol gain is kappa_n = (a(phi_n)^T v) alpha_n.  The user
// azimuth is redrawn per symbol by default, or held for the whole window.
inline std::pair<std::vector<cplx>, CommRealization>
comm_channel(const ComplexMatrix& y, const CommLinkParams& p, const BeamWeights& v,
             SeededRng& rng, AngleHold hold = AngleHold::per_symbol) {
    p.validate();
    if (y.rows() == 0 || y.cols() == 0) throw DomainError("comm_channel: empty block");
    if (v.size() != y.rows()) throw DomainError("comm_channel: beam/block size mismatch");
    const std::size_t k = y.rows();
    const std::size_t n = y.cols();

    std::vector<cplx> z(n);
    CommRealization real;
    real.angles.resize(n);
    real.fading.resize(n);
    real.gains.resize(n);

    double held = 0.0;
    std::vector<cplx> a;
    cplx beam_response{};
    for (std::size_t j = 0; j < n; ++j) {
        if (j == 0 || hold == AngleHold::per_symbol) {
            held = rng.uniform(p.receiver_region.lo, p.receiver_region.hi);
            a = steering_vector(held, k);
            beam_response = dotu(std::span<const cplx>(a), std::span<const cplx>(v.w));
        }
        const cplx alpha = rng.complex_normal(p.fading_power);
        cplx rx{};
        for (std::size_t i = 0; i < k; ++i) rx += a[i] * y(i, j);
        z[j] = rx * alpha + rng.complex_normal(p.noise_power);

        real.angles[j] = held;
        real.fading[j] = alpha;
        real.gains[j] = beam_response * alpha;
    }
    return {std::move(z), std::move(real)};
}

// Monostatic return: column n is T alpha_n (a^T y_n) a + noise, with the
// same steering vector on transmit and receive.
inline ComplexMatrix sense_channel(const ComplexMatrix& y, const SensingScene& scene,
                                   const SenseLinkParams& p, SeededRng& rng) {
    p.validate();
    if (y.rows() == 0 || y.cols() == 0) throw DomainError("sense_channel: empty block");
    if (scene.gains.size() != y.cols())
        throw DomainError("sense_channel: scene gain count != window length");
    const std::size_t k = y.rows();
    const std::size_t n = y.cols();
    const auto a = steering_vector(scene.angle, k);

    ComplexMatrix z(k, n);
    for (std::size_t j = 0; j < n; ++j) {
        cplx tx{};
        for (std::size_t i = 0; i < k; ++i) tx += a[i] * y(i, j);
        const cplx amp = scene.target_present ? scene.gains[j] * tx : cplx{};
        for (std::size_t i = 0; i < k; ++i) z(i, j) = amp * a[i] + rng.complex_normal(p.noise_power);
    }
    return z;
}

// Sample autocorrelation C = (1/N) Z Z^H, exactly Hermitian by construction.
inline ComplexMatrix acm(const ComplexMatrix& z) {
    if (z.rows() == 0 || z.cols() == 0) throw DomainError("acm: empty window");
    const std::size_t k = z.rows();
    const std::size_t n = z.cols();
    const double inv = 1.0 / static_cast<double>(n);
    ComplexMatrix c(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            cplx s{};
            for (std::size_t l = 0; l < n; ++l) s += z(i, l) * std::conj(z(j, l));
            s *= inv;
            if (i == j) {
                c(i, i) = cplx{s.real(), 0.0};
            } else {
                c(i, j) = s;
                c(j, i) = std::conj(s);
            }
        }
    }
    return c;
}

} // namespace jcas
