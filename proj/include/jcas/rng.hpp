// Counter-based deterministic RNG with cheap stream splitting.
//
// Every draw is a pure function of (seed, stream, counter), so a generator can
// be reconstructed at any point and substreams can be handed to independent
// pieces of work (per batch, per scene, per antenna) without coordination.
// The contract is bit-for-bit reproducibility of the produced sequence for a
// fixed (seed, stream) across platforms and thread counts.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include "jcas/error.hpp"

namespace jcas {

namespace detail {

// SplitMix64 finalizer: bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_base(std::uint64_t seed, std::uint64_t stream) noexcept {
    const std::uint64_t a = mix64(seed ^ 0xD1B54A32D192ED03ull);
    const std::uint64_t b = mix64(stream ^ 0x8CB92BA72F3D8DD7ull);
    return mix64(a + 0x2545F4914F6CDD1Dull * b);
}

} // namespace detail

class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : base_(detail::derive_base(seed, stream)) {}

    // Independent child generator; (this generator, id) -> fresh stream.
    // Derivation does not advance or depend on the parent's counter.
    SeededRng substream(std::uint64_t id) const noexcept {
        return SeededRng(base_, detail::mix64(id ^ 0xA0761D6478BD642Full), tag{});
    }

    std::uint64_t next_u64() noexcept {
        counter_ += 1;
        return detail::mix64(base_ + 0x9E3779B97F4A7C15ull * counter_);
    }

    // Uniform on [0,1): 53 random mantissa bits, never returns 1.
    double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        if (!(lo <= hi)) throw DomainError("uniform: empty interval");
        return lo + (hi - lo) * uniform01();
    }

    bool bernoulli(double p) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("bernoulli: p outside [0,1]");
        return uniform01() < p;
    }

    // Circularly symmetric complex normal, E|z|^2 = variance.
    // Amplitude-phase construction: r = sqrt(-variance * ln(1-u1)), angle = 2*pi*u2.
    std::complex<double> complex_normal(double variance) {
        if (!(variance >= 0.0)) throw DomainError("complex_normal: negative variance");
        if (variance == 0.0) return {0.0, 0.0};
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-variance * std::log1p(-u1));
        return {r * std::cos(6.283185307179586476925286766559 * u2),
                r * std::sin(6.283185307179586476925286766559 * u2)};
    }

    // Real N(0, stddev^2) via the real part of a complex normal of variance 2*stddev^2.
    double normal(double stddev) {
        if (!(stddev >= 0.0)) throw DomainError("normal: negative stddev");
        return complex_normal(2.0 * stddev * stddev).real();
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw DomainError("below: n must be positive");
        // Rejection-free scaled draw is fine for the n << 2^53 used here.
        return static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
    }

  private:
    struct tag {};
    SeededRng(std::uint64_t parent_base, std::uint64_t mixed_id, tag) noexcept
        : base_(detail::derive_base(parent_base, mixed_id)) {}

    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

} // namespace jcas
