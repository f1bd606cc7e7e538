#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "jcas/beam.hpp"
#include "jcas/constellation.hpp"
#include "jcas/rng.hpp"

using jcas::cplx;

namespace {
int hamming(std::uint32_t a, std::uint32_t b) {
    int h = 0;
    for (std::uint32_t x = a ^ b; x; x >>= 1) h += static_cast<int>(x & 1u);
    return h;
}
} // namespace

TEST_CASE("qam: supported orders have unit mean energy and correct spacing") {
    for (const std::size_t m : {std::size_t{4}, std::size_t{16}, std::size_t{64}}) {
        const auto c = jcas::build_qam(m);
        REQUIRE(c.points.size() == m);
        REQUIRE(c.order == m);
        double e = 0.0;
        for (const cplx& p : c.points) e += std::norm(p);
        CHECK(e / static_cast<double>(m) == doctest::Approx(1.0).epsilon(1e-14));
    }
    // 16-QAM amplitude step.
    const auto c16 = jcas::build_qam(16);
    double min_abs_re = 1e9;
    for (const cplx& p : c16.points) min_abs_re = std::min(min_abs_re, std::abs(p.real()));
    CHECK(min_abs_re == doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-14));
}

TEST_CASE("qam: 4-QAM is the unit-energy QPSK square") {
    const auto c = jcas::build_qam(4);
    const double s = 1.0 / std::sqrt(2.0);
    for (const cplx& p : c.points) {
        CHECK(std::abs(std::abs(p.real()) - s) < 1e-14);
        CHECK(std::abs(std::abs(p.imag()) - s) < 1e-14);
    }
    // Label 00 -> first I level, first Q level (both negative amplitudes).
    CHECK(c.points[0].real() == doctest::Approx(-s));
    CHECK(c.points[0].imag() == doctest::Approx(-s));
}

TEST_CASE("qam: Gray labelling - nearest neighbours differ in exactly one bit") {
    for (const std::size_t m : {std::size_t{4}, std::size_t{16}, std::size_t{64}}) {
        const auto c = jcas::build_qam(m);
        double dmin = 1e9;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j)
                dmin = std::min(dmin, std::abs(c.points[i] - c.points[j]));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                if (i == j) continue;
                if (std::abs(c.points[i] - c.points[j]) < dmin * 1.001)
                    CHECK(hamming(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)) == 1);
            }
    }
}

TEST_CASE("qam: labels are unique points") {
    const auto c = jcas::build_qam(64);
    for (std::size_t i = 0; i < c.points.size(); ++i)
        for (std::size_t j = i + 1; j < c.points.size(); ++j)
            CHECK(std::abs(c.points[i] - c.points[j]) > 1e-9);
}

TEST_CASE("qam: modulate maps bit strings onto labelled points") {
    const auto c = jcas::build_qam(16);
    const std::vector<std::uint8_t> bits{1, 0, 1, 1};
    CHECK(jcas::modulate(bits, c) == c.points[0b1011]);

    const std::vector<std::uint8_t> wrong{1, 0, 1};
    CHECK_THROWS_AS((void)jcas::modulate(wrong, c), jcas::DomainError);
    const std::vector<std::uint8_t> bad{1, 0, 2, 1};
    CHECK_THROWS_AS((void)jcas::modulate(bad, c), jcas::DomainError);
    CHECK_THROWS_AS((void)jcas::build_qam(8), jcas::DomainError);
    CHECK_THROWS_AS((void)jcas::build_qam(0), jcas::DomainError);
}

TEST_CASE("steering_vector: phase ramp with the first element already rotated") {
    const auto a0 = jcas::steering_vector(0.0, 4);
    for (const cplx& e : a0) CHECK(std::abs(e - cplx{1.0, 0.0}) < 1e-15);

    const double phi = 0.3;
    const auto a = jcas::steering_vector(phi, 8);
    REQUIRE(a.size() == 8);
    const double step = std::numbers::pi * std::sin(phi);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(std::abs(a[k]) == doctest::Approx(1.0).epsilon(1e-14));
        const double want = step * static_cast<double>(k + 1);
        CHECK(std::arg(a[k]) ==
              doctest::Approx(std::remainder(want, 2.0 * std::numbers::pi)).epsilon(1e-12));
    }

    CHECK_THROWS_AS((void)jcas::steering_vector(2.0, 4), jcas::DomainError);
    CHECK_THROWS_AS((void)jcas::steering_vector(0.0, 0), jcas::DomainError);
}

TEST_CASE("assemble_block: rank-one outer product") {
    const std::vector<cplx> v{{1.0, 0.0}, {0.0, 1.0}};
    const std::vector<cplx> x{{2.0, 0.0}, {0.0, -1.0}, {1.0, 1.0}};
    const auto y = jcas::assemble_block(v, x);
    REQUIRE(y.rows() == 2);
    REQUIRE(y.cols() == 3);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t n = 0; n < 3; ++n) CHECK(std::abs(y(k, n) - v[k] * x[n]) < 1e-15);
}

TEST_CASE("beam_gain: matched beam collects the full array gain") {
    const std::size_t k = 16;
    const double phi = 0.2;
    const auto a = jcas::steering_vector(phi, k);
    jcas::BeamWeights v;
    v.w.resize(k);
    for (std::size_t i = 0; i < k; ++i) v.w[i] = std::conj(a[i]) / std::sqrt(double(k));
    CHECK(v.is_normalized(1e-12));
    CHECK(jcas::beam_gain(v.w, phi) == doctest::Approx(double(k)).epsilon(1e-12));
    // Mismatched direction collects strictly less.
    CHECK(jcas::beam_gain(v.w, -0.4) < double(k) * 0.2);
}

TEST_CASE("beam weights: normalization") {
    jcas::BeamWeights v;
    v.w = {cplx{3.0, 0.0}, cplx{0.0, 4.0}};
    CHECK_FALSE(v.is_normalized());
    v.normalize();
    CHECK(v.is_normalized(1e-15));
    CHECK(std::abs(v.w[0] - cplx{0.6, 0.0}) < 1e-15);

    jcas::BeamWeights z;
    z.w = {cplx{}, cplx{}};
    CHECK_THROWS_AS(z.normalize(), jcas::DomainError);
}

TEST_CASE("angle region: validation and degrees helper") {
    CHECK_THROWS_AS(jcas::AngleRegion(0.5, 0.2), jcas::DomainError);
    CHECK_THROWS_AS(jcas::AngleRegion(-2.0, 0.0), jcas::DomainError);
    CHECK_THROWS_AS(jcas::AngleRegion(0.0, 2.0), jcas::DomainError);
    const auto r = jcas::region_from_degrees(30.0, 50.0);
    CHECK(r.lo == doctest::Approx(30.0 * std::numbers::pi / 180.0));
    CHECK(r.hi == doctest::Approx(50.0 * std::numbers::pi / 180.0));
    CHECK(r.contains(0.6));
    CHECK_FALSE(r.contains(0.0));
}

TEST_CASE("region_power: full field of view is exactly one") {
    jcas::SeededRng rng(31, 0);
    jcas::BeamWeights v;
    v.w.resize(8);
    for (auto& e : v.w) e = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    v.normalize();
    constexpr double hp = std::numbers::pi / 2.0;
    CHECK(jcas::region_power(v.w, jcas::AngleRegion(-hp, hp)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("region_power: bounded, near-additive over a partition") {
    jcas::SeededRng rng(32, 0);
    constexpr double hp = std::numbers::pi / 2.0;
    for (int rep = 0; rep < 10; ++rep) {
        jcas::BeamWeights v;
        v.w.resize(16);
        for (auto& e : v.w) e = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        v.normalize();
        const double f1 = jcas::region_power(v.w, jcas::AngleRegion(-hp, 0.0));
        const double f2 = jcas::region_power(v.w, jcas::AngleRegion(0.0, hp));
        CHECK(f1 >= 0.0);
        CHECK(f1 <= 1.0);
        CHECK(f2 >= 0.0);
        CHECK(f2 <= 1.0);
        CHECK(std::abs(f1 + f2 - 1.0) < 0.02);
    }
    // Zero-width region carries no power; tiny grids are rejected.
    jcas::BeamWeights u;
    u.w = {cplx{1.0, 0.0}};
    CHECK(jcas::region_power(u.w, jcas::AngleRegion(0.1, 0.1)) == 0.0);
    CHECK_THROWS_AS((void)jcas::region_power(u.w, jcas::AngleRegion(0.0, 0.1), 1), jcas::DomainError);
}

TEST_CASE("region_power: single antenna radiates by width ratio") {
    jcas::BeamWeights v;
    v.w = {cplx{1.0, 0.0}};
    const auto r = jcas::region_from_degrees(-20.0, 20.0);
    CHECK(jcas::region_power(v.w, r) == doctest::Approx(40.0 / 180.0).epsilon(0.01));
}

TEST_CASE("region_power: matched beam concentrates power in its region") {
    const std::size_t k = 16;
    const double phi = 40.0 * std::numbers::pi / 180.0;
    const auto a = jcas::steering_vector(phi, k);
    jcas::BeamWeights v;
    v.w.resize(k);
    for (std::size_t i = 0; i < k; ++i) v.w[i] = std::conj(a[i]) / std::sqrt(double(k));
    const double inside = jcas::region_power(v.w, jcas::region_from_degrees(30.0, 50.0));
    CHECK(inside > 0.8);
    const double outside = jcas::region_power(v.w, jcas::region_from_degrees(-50.0, -30.0));
    CHECK(outside < 0.05);
    // Average gain in the pointing region is well above isotropic.
    CHECK(jcas::region_average_gain(v.w, jcas::region_from_degrees(38.0, 42.0)) > 4.0);
}
