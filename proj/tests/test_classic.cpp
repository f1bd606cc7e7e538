#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <vector>

#include "jcas/channel.hpp"
#include "jcas/classic.hpp"
#include "jcas/constellation.hpp"
#include "jcas/rng.hpp"
#include "support/oracles.hpp"

using jcas::cplx;
using jcas::ComplexMatrix;

namespace {

jcas::BeamWeights matched_beam(double angle, std::size_t k) {
    const auto a = jcas::steering_vector(angle, k);
    jcas::BeamWeights v;
    v.w.resize(k);
    for (std::size_t i = 0; i < k; ++i) v.w[i] = std::conj(a[i]) / std::sqrt(double(k));
    return v;
}

} // namespace

TEST_CASE("np_detect: zero observation is never detected") {
    const auto d = jcas::np_detect(ComplexMatrix(16, 1), 1.0, 1e-2);
    CHECK(d.statistic == 0.0);
    CHECK(d.threshold > 0.0);
    CHECK_FALSE(d.detected);
}

TEST_CASE("np_detect: decision is exactly statistic >= threshold") {
    jcas::SeededRng rng(41, 0);
    int detected = 0;
    for (int rep = 0; rep < 2000; ++rep) {
        ComplexMatrix z(4, 2);
        for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] = rng.complex_normal(1.4);
        const auto d = jcas::np_detect(z, 1.0, 0.5); // loose threshold straddles
        CHECK(d.detected == (d.statistic >= d.threshold));
        detected += d.detected;
    }
    CHECK(detected > 0);
    CHECK(detected < 2000);
}

TEST_CASE("np_detect: H0 false-alarm rate sits in the binomial window") {
    jcas::SeededRng rng(42, 0);
    const double pf = 1e-2;
    int fa = 0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        ComplexMatrix z(16, 1);
        for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] = rng.complex_normal(1.0);
        fa += jcas::np_detect(z, 1.0, pf).detected;
    }
    const double rate = double(fa) / trials;
    CHECK(rate >= 0.007);
    CHECK(rate <= 0.013);
}

TEST_CASE("np_detect: false-alarm rate invariant to window length") {
    jcas::SeededRng rng(43, 0);
    for (const std::size_t nwin : {std::size_t{5}, std::size_t{15}}) {
        int fa = 0;
        const int trials = 30000;
        for (int t = 0; t < trials; ++t) {
            ComplexMatrix z(16, nwin);
            for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] = rng.complex_normal(2.0);
            fa += jcas::np_detect(z, 2.0, 1e-2).detected;
        }
        const double rate = double(fa) / trials;
        // 3 sigma of Binomial(3e4, 0.01).
        CHECK(std::abs(rate - 0.01) < 3.0 * std::sqrt(0.01 * 0.99 / trials));
    }
}

TEST_CASE("np_detect: argument validation") {
    ComplexMatrix z(2, 2);
    CHECK_THROWS_AS((void)jcas::np_detect(z, 0.0, 1e-2), jcas::DomainError);
    CHECK_THROWS_AS((void)jcas::np_detect(z, 1.0, 0.0), jcas::DomainError);
    CHECK_THROWS_AS((void)jcas::np_detect(z, 1.0, 1.0), jcas::DomainError);
    CHECK_THROWS_AS((void)jcas::np_detect(ComplexMatrix(), 1.0, 1e-2), jcas::DomainError);
}

TEST_CASE("esprit_aoa: noiseless steering autocorrelation recovers the angle") {
    const std::size_t k = 16;
    for (const double deg : {10.0, 0.0, -17.5}) {
        const double theta = deg * std::numbers::pi / 180.0;
        const auto a = jcas::steering_vector(theta, k);
        ComplexMatrix corr(k, k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) corr(i, j) = a[i] * std::conj(a[j]);
        const auto est = jcas::esprit_aoa(corr);
        CHECK(std::abs(est.angle - theta) < 1e-6);
        CHECK(est.confident);
    }
}

TEST_CASE("esprit_aoa: isotropic correlation is flagged low-confidence") {
    const std::size_t k = 8;
    ComplexMatrix eye(k, k);
    for (std::size_t i = 0; i < k; ++i) eye(i, i) = 1.0;
    const auto est = jcas::esprit_aoa(eye);
    CHECK(std::abs(est.angle) <= std::numbers::pi / 2.0);
    CHECK_FALSE(est.confident);
}

TEST_CASE("esprit_aoa: degenerate and invalid inputs") {
    CHECK_THROWS_AS((void)jcas::esprit_aoa(ComplexMatrix(8, 8)), jcas::EstimationError);
    CHECK_THROWS_AS((void)jcas::esprit_aoa(ComplexMatrix(1, 1)), jcas::DomainError);
    CHECK_THROWS_AS((void)jcas::esprit_aoa(ComplexMatrix(3, 4)), jcas::DomainError);
}

TEST_CASE("esprit_aoa: high-SNR RMSE tracks the variance bound (smoke)") {
    const std::size_t k = 16, nwin = 15;
    const double theta = 10.0 * std::numbers::pi / 180.0;
    const double noise_power = 2.56; // K*beta*sigma_s^2/sigma_ns^2 = 20 dB at beta=K
    const auto v = matched_beam(theta, k);
    const auto c = jcas::build_qam(16);

    jcas::SenseLinkParams p;
    p.noise_power = noise_power;
    p.target_region = jcas::region_from_degrees(-20.0, 20.0);

    jcas::SeededRng rng(44, 0);
    double se = 0.0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        std::vector<cplx> x(nwin);
        for (auto& s : x) s = c.points[rng.below(c.order)];
        jcas::SensingScene scene;
        scene.target_present = true;
        scene.angle = theta;
        scene.gains.resize(nwin);
        for (auto& g : scene.gains) g = rng.complex_normal(1.0);
        const auto y = jcas::assemble_block(v.w, x);
        const auto z = jcas::sense_channel(y, scene, p, rng);
        const auto est = jcas::esprit_aoa(jcas::acm(z));
        se += (est.angle - theta) * (est.angle - theta);
    }
    const double rmse = std::sqrt(se / trials);
    jcas::CrbInputs ci;
    ci.angle = theta;
    ci.noise_power = noise_power;
    ci.reflect_power = 1.0;
    ci.beam_gain = jcas::beam_gain(v.w, theta);
    ci.n_antennas = k;
    ci.window_len = nwin;
    const double bound = std::sqrt(jcas::crb(ci));
    CHECK(rmse < 3.0 * bound);
    CHECK(rmse > 0.3 * bound);
}

TEST_CASE("crb: structural ratios are exact") {
    jcas::CrbInputs a;
    a.angle = 0.2;
    a.noise_power = 1.3;
    a.reflect_power = 0.8;
    a.beam_gain = 5.0;
    a.n_antennas = 16;
    a.window_len = 3;

    auto b = a;
    b.window_len = 6;
    CHECK(jcas::crb(a) / jcas::crb(b) == doctest::Approx(2.0).epsilon(1e-15));

    jcas::CrbInputs t0 = a, t60 = a;
    t0.angle = 0.0;
    t60.angle = 60.0 * std::numbers::pi / 180.0;
    CHECK(jcas::crb(t60) / jcas::crb(t0) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("crb: hand evaluation at the reference point") {
    jcas::CrbInputs in;
    in.angle = 0.0;
    in.noise_power = 1.0;
    in.reflect_power = 1.0;
    in.beam_gain = 16.0;
    in.n_antennas = 16;
    in.window_len = 1;
    // Term-by-term re-evaluation of the bound.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double want =
        (1.0 / pi2) * (1.0 / 2.0) * ((1.0 + 16.0 * 16.0 * 1.0) / (16.0 * 256.0 * 1.0)) *
        (6.0 / (0.5 * 4096.0 - 0.5 * 16.0));
    CHECK(jcas::crb(in) == doctest::Approx(want).epsilon(1e-15));
}

TEST_CASE("crb: monotone decreasing in gain, power, window, antennas") {
    jcas::CrbInputs base;
    base.angle = 0.1;
    base.noise_power = 1.0;
    base.reflect_power = 1.0;
    base.beam_gain = 4.0;
    base.n_antennas = 8;
    base.window_len = 2;
    const double ref = jcas::crb(base);

    for (double g : {6.0, 10.0, 16.0}) {
        auto in = base;
        in.beam_gain = g;
        CHECK(jcas::crb(in) < ref);
    }
    for (double s : {1.5, 2.0, 4.0}) {
        auto in = base;
        in.reflect_power = s;
        CHECK(jcas::crb(in) < ref);
    }
    for (std::size_t n : {3u, 5u, 9u}) {
        auto in = base;
        in.window_len = n;
        CHECK(jcas::crb(in) < ref);
    }
    for (std::size_t k : {12u, 16u, 32u}) {
        auto in = base;
        in.n_antennas = k;
        CHECK(jcas::crb(in) < ref);
    }
}

TEST_CASE("crb: published vs conventional variant") {
    jcas::CrbInputs in;
    in.angle = 0.0;
    in.noise_power = 2.0;
    in.reflect_power = 1.0; // sigma_s^3 == sigma_s^4 at unit power
    in.beam_gain = 8.0;
    in.n_antennas = 8;
    in.window_len = 4;
    CHECK(jcas::crb(in, jcas::CrbVariant::published) ==
          doctest::Approx(jcas::crb(in, jcas::CrbVariant::conventional)).epsilon(1e-15));

    in.reflect_power = 4.0; // conventional divides by an extra sigma_s = 2
    CHECK(jcas::crb(in, jcas::CrbVariant::published) ==
          doctest::Approx(2.0 * jcas::crb(in, jcas::CrbVariant::conventional)).epsilon(1e-13));
}

TEST_CASE("crb: domain errors") {
    jcas::CrbInputs in;
    in.angle = std::numbers::pi / 2.0;
    CHECK_THROWS_AS((void)jcas::crb(in), jcas::DomainError);
    in.angle = 0.0;
    in.n_antennas = 1;
    CHECK_THROWS_AS((void)jcas::crb(in), jcas::DomainError);
    in.n_antennas = 4;
    in.noise_power = 0.0;
    CHECK_THROWS_AS((void)jcas::crb(in), jcas::DomainError);
    in.noise_power = 1.0;
    in.window_len = 0;
    CHECK_THROWS_AS((void)jcas::crb(in), jcas::DomainError);
}

TEST_CASE("mmse_equalize: limits and perturbation") {
    const cplx z{1.0, -2.0};
    const cplx kappa{0.5, 0.25};
    CHECK(std::abs(jcas::mmse_equalize(z, kappa, 0.0) - z / kappa) < 1e-15);
    CHECK(jcas::mmse_equalize(z, cplx{}, 1.0) == cplx{});

    jcas::SeededRng rng(45, 0);
    for (int rep = 0; rep < 100; ++rep) {
        const cplx x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const cplx k{rng.uniform(0.5, 2.0), rng.uniform(-1, 1)};
        const double s2 = 1e-6;
        const cplx out = jcas::mmse_equalize(k * x, k, s2);
        CHECK(std::abs(out - x) < 1e-4 * std::abs(x) + 1e-6);
    }
}

TEST_CASE("exact_llr: symmetric observation gives zero LLR") {
    const auto c = jcas::build_qam(4);
    const cplx kappa{1.0, 0.0};
    const double s2 = 0.7;
    // Purely imaginary z is equidistant from the I-bit classes.
    const cplx z{0.0, 0.35};
    const cplx zeq = jcas::mmse_equalize(z, kappa, s2);
    const auto llr = jcas::exact_llr(zeq, kappa, s2, c);
    CHECK(llr[0] == 0.0);
    CHECK(llr[1] != 0.0);
}

TEST_CASE("exact_llr: high-SNR signs match the transmitted label") {
    const auto c = jcas::build_qam(16);
    const cplx kappa{0.8, -0.4};
    const double s2 = 1e-4;
    for (std::uint32_t label = 0; label < 16; ++label) {
        const cplx z = kappa * c.points[label];
        const auto llr = jcas::exact_llr(jcas::mmse_equalize(z, kappa, s2), kappa, s2, c);
        for (std::size_t b = 0; b < 4; ++b) {
            const bool bit = (label >> (3 - b)) & 1u;
            CHECK((bit ? llr[b] < 0.0 : llr[b] > 0.0));
        }
    }
}

TEST_CASE("exact_llr: matches the extended-precision brute-force oracle") {
    const auto c = jcas::build_qam(16);
    std::vector<std::uint32_t> labels(c.order);
    std::iota(labels.begin(), labels.end(), 0u);

    jcas::SeededRng rng(46, 0);
    for (int rep = 0; rep < 300; ++rep) {
        const cplx kappa{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        if (std::abs(kappa) < 1e-3) continue;
        const cplx z{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const double s2 = std::exp(rng.uniform(std::log(1e-2), std::log(4.0)));
        const auto got = jcas::exact_llr(jcas::mmse_equalize(z, kappa, s2), kappa, s2, c);
        const auto want =
            oracle::llr_brute(z, kappa, s2, c.points, labels, c.bits_per_symbol);
        for (std::size_t b = 0; b < 4; ++b)
            CHECK(std::abs(got[b] - want[b]) < 1e-9 * std::max(1.0, std::abs(want[b])));
    }
}

TEST_CASE("exact_llr: zero channel gain carries no information") {
    const auto c = jcas::build_qam(16);
    const auto llr = jcas::exact_llr(cplx{0.3, 0.1}, cplx{}, 1.0, c);
    for (double l : llr) CHECK(l == 0.0);
    CHECK_THROWS_AS((void)jcas::exact_llr(cplx{}, cplx{1.0, 0.0}, 0.0, c), jcas::DomainError);
}

TEST_CASE("exact_llr: hard decisions reproduce the closed-form QAM error rate") {
    const auto c = jcas::build_qam(16);
    // Symbol SNR chosen so BER is close to 1e-2.
    const double snr = std::pow(10.0, 13.0 / 10.0);
    const double s2 = 1.0 / snr;
    jcas::SeededRng rng(47, 0);
    const cplx kappa{1.0, 0.0};
    std::size_t errors = 0, total = 0;
    for (int sym = 0; sym < 200000; ++sym) {
        const std::uint32_t label = static_cast<std::uint32_t>(rng.below(16));
        const cplx z = kappa * c.points[label] + rng.complex_normal(s2);
        const auto llr = jcas::exact_llr(jcas::mmse_equalize(z, kappa, s2), kappa, s2, c);
        for (std::size_t b = 0; b < 4; ++b) {
            const bool sent = (label >> (3 - b)) & 1u;
            const bool dec = llr[b] < 0.0;
            errors += (sent != dec);
            ++total;
        }
    }
    const double ber = double(errors) / double(total);
    const double want = oracle::qam_ber_awgn(16, snr);
    CHECK(std::abs(ber - want) / want < 0.10); // 2e5 symbols; acceptance runs 1e6 at 5%
}

TEST_CASE("bmi_estimate: trivial endpoints and clamping") {
    const std::vector<double> zeros(8, 0.0);
    const std::vector<std::uint8_t> bits{0, 1, 0, 1, 1, 0, 1, 0};
    CHECK(jcas::bmi_estimate(zeros, bits, 4) == 0.0);

    std::vector<double> conf(8);
    for (std::size_t i = 0; i < 8; ++i) conf[i] = bits[i] ? -300.0 : 300.0;
    CHECK(jcas::bmi_estimate(conf, bits, 4) == doctest::Approx(4.0).epsilon(1e-12));

    // Adversarially wrong LLRs clamp at zero rather than going negative.
    std::vector<double> wrong(8);
    for (std::size_t i = 0; i < 8; ++i) wrong[i] = bits[i] ? 50.0 : -50.0;
    CHECK(jcas::bmi_estimate(wrong, bits, 4) == 0.0);

    CHECK_THROWS_AS((void)jcas::bmi_estimate(zeros, bits, 3), jcas::DomainError);
    const std::vector<std::uint8_t> bad{0, 2, 0, 1, 1, 0, 1, 0};
    CHECK_THROWS_AS((void)jcas::bmi_estimate(zeros, bad, 4), jcas::DomainError);
}

TEST_CASE("bmi_estimate: agrees with quadrature for consistent Gaussian LLRs") {
    // L | b=0 ~ N(m, 2m) is the classic binary-AWGN consistent LLR model.
    for (const double m : {0.5, 2.0, 8.0}) {
        const double want = oracle::gaussian_llr_bmi(m);
        jcas::SeededRng rng(48, static_cast<std::uint64_t>(m * 10));
        const std::size_t n = 400000;
        std::vector<double> llr(n);
        std::vector<std::uint8_t> bits(n);
        for (std::size_t i = 0; i < n; ++i) {
            bits[i] = rng.bernoulli(0.5);
            const double l0 = m + std::sqrt(2.0 * m) * rng.normal(1.0);
            llr[i] = bits[i] ? -l0 : l0;
        }
        const double got = jcas::bmi_estimate(llr, bits, 1);
        CHECK(got == doctest::Approx(want).epsilon(0.02));
    }
}

TEST_CASE("bmi_estimate: oracle demapper at high SNR approaches capacity, cross-checked") {
    const auto c = jcas::build_qam(16);
    const double snr = 100.0; // 20 dB
    const double s2 = 1.0 / snr;
    jcas::SeededRng rng(49, 0);
    const std::size_t nsym = 50000;
    std::vector<double> llrs;
    std::vector<std::uint8_t> bits;
    llrs.reserve(nsym * 4);
    bits.reserve(nsym * 4);

    // Independent histogram MI estimator per bit position.
    const int nbins = 160;
    const double clip = 40.0;
    std::vector<std::vector<std::array<double, 2>>> hist(
        4, std::vector<std::array<double, 2>>(nbins, {0.0, 0.0}));

    for (std::size_t sym = 0; sym < nsym; ++sym) {
        const std::uint32_t label = static_cast<std::uint32_t>(rng.below(16));
        const cplx z = c.points[label] + rng.complex_normal(s2);
        const auto llr =
            jcas::exact_llr(jcas::mmse_equalize(z, cplx{1.0, 0.0}, s2), cplx{1.0, 0.0}, s2, c);
        for (std::size_t b = 0; b < 4; ++b) {
            const std::uint8_t bit = (label >> (3 - b)) & 1u;
            llrs.push_back(llr[b]);
            bits.push_back(bit);
            const double l = std::clamp(llr[b], -clip, clip - 1e-9);
            const int bin = static_cast<int>((l + clip) / (2.0 * clip) * nbins);
            hist[b][static_cast<std::size_t>(bin)][bit] += 1.0;
        }
    }
    const double got = jcas::bmi_estimate(llrs, bits, 4);

    double mi = 0.0;
    for (std::size_t b = 0; b < 4; ++b) {
        double pb[2] = {0.0, 0.0};
        for (const auto& cell : hist[b]) {
            pb[0] += cell[0];
            pb[1] += cell[1];
        }
        const double tot = pb[0] + pb[1];
        for (const auto& cell : hist[b]) {
            const double pj = (cell[0] + cell[1]) / tot;
            if (pj == 0.0) continue;
            for (int v = 0; v < 2; ++v) {
                if (cell[v] == 0.0) continue;
                const double joint = cell[v] / tot;
                mi += joint * std::log2(joint / (pj * (pb[v] / tot)));
            }
        }
    }
    CHECK(std::abs(got - mi) < 0.05);
    CHECK(got > 3.9);
    CHECK(got <= 4.0);
}
