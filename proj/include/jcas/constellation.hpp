// Gray-labelled square QAM alphabets at unit mean symbol energy.
//
// Labels split as [I bits | Q bits] with the first bit most significant; each
// axis carries a reflected-Gray code over equally spaced amplitudes
// (2p - (L-1)) * delta, delta = sqrt(3 / (2 (L^2 - 1))), L = sqrt(M).
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "jcas/error.hpp"

namespace jcas {

struct Constellation {
    std::size_t order = 0;           // M
    std::size_t bits_per_symbol = 0; // log2 M
    // points[label] where label packs the bit string MSB-first.
    std::vector<std::complex<double>> points;

    std::uint32_t label_of(std::span<const std::uint8_t> bits) const {
        if (bits.size() != bits_per_symbol)
            throw DomainError("constellation: wrong number of bits");
        std::uint32_t v = 0;
        for (const std::uint8_t b : bits) {
            if (b > 1) throw DomainError("constellation: bits must be 0/1");
            v = (v << 1) | b;
        }
        return v;
    }
};

namespace detail {
inline std::size_t int_log2(std::size_t v) {
    std::size_t n = 0;
    while ((std::size_t{1} << n) < v) ++n;
    return n;
}
} // namespace detail

inline Constellation build_qam(std::size_t order) {
    const std::size_t n = detail::int_log2(order);
    if ((std::size_t{1} << n) != order || n == 0 || n % 2 != 0)
        throw DomainError("build_qam: order must be an even power of two (4, 16, 64, ...)");

    const std::size_t half = n / 2;
    const std::size_t levels = std::size_t{1} << half;
    const double delta =
        std::sqrt(3.0 / (2.0 * (static_cast<double>(levels * levels) - 1.0)));
    // Inverse of g = p ^ (p >> 1): XOR of all right shifts.
    const auto gray_to_pos = [](std::uint32_t g) {
        std::uint32_t p = 0;
        while (g) {
            p ^= g;
            g >>= 1;
        }
        return p;
    };
    const auto amp = [&](std::uint32_t pos) {
        return (2.0 * pos - (static_cast<double>(levels) - 1.0)) * delta;
    };

    Constellation c;
    c.order = order;
    c.bits_per_symbol = n;
    c.points.resize(order);
    for (std::uint32_t label = 0; label < order; ++label) {
        const std::uint32_t gi = label >> half;                      // first bits: I axis
        const std::uint32_t gq = label & ((1u << half) - 1u);        // last bits: Q axis
        c.points[label] = {amp(gray_to_pos(gi)), amp(gray_to_pos(gq))};
    }
    return c;
}

inline std::complex<double> modulate(std::span<const std::uint8_t> bits, const Constellation& c) {
    return c.points[c.label_of(bits)];
}

} // namespace jcas
