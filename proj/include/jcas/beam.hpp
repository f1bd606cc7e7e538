// Transmit beams over a half-wavelength uniform linear array.
//
// The array response at azimuth phi has entries exp(j pi k sin phi) for
// k = 1..K, i.e. the first element already carries one phase step.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "jcas/complex_matrix.hpp"
#include "jcas/error.hpp"

namespace jcas {

struct AngleRegion {
    double lo = 0.0; // radians
    double hi = 0.0;

    AngleRegion() = default;
    AngleRegion(double lo_rad, double hi_rad) : lo(lo_rad), hi(hi_rad) {
        constexpr double half_pi = std::numbers::pi / 2.0;
        if (!(lo >= -half_pi && lo <= hi && hi <= half_pi))
            throw DomainError("AngleRegion: require -pi/2 <= lo <= hi <= pi/2");
    }

    double width() const noexcept { return hi - lo; }
    bool contains(double a) const noexcept { return a >= lo && a <= hi; }
};

inline AngleRegion region_from_degrees(double lo_deg, double hi_deg) {
    constexpr double d2r = std::numbers::pi / 180.0;
    return AngleRegion(lo_deg * d2r, hi_deg * d2r);
}

// Unit-power beamforming weights (||w||_2 = 1).
struct BeamWeights {
    std::vector<cplx> w;

    std::size_t size() const noexcept { return w.size(); }
    double power() const noexcept {
        double s = 0.0;
        for (const cplx& e : w) s += std::norm(e);
        return s;
    }
    bool is_normalized(double tol = 1e-12) const noexcept {
        return std::abs(power() - 1.0) <= tol;
    }
    void normalize() {
        const double p = power();
        if (p <= 0.0) throw DomainError("BeamWeights: cannot normalize zero vector");
        const double inv = 1.0 / std::sqrt(p);
        for (cplx& e : w) e *= inv;
    }
};

inline std::vector<cplx> steering_vector(double angle, std::size_t n_antennas) {
    constexpr double half_pi = std::numbers::pi / 2.0;
    if (!(angle >= -half_pi && angle <= half_pi))
        throw DomainError("steering_vector: angle outside [-pi/2, pi/2]");
    if (n_antennas == 0) throw DomainError("steering_vector: need at least one antenna");
    std::vector<cplx> a(n_antennas);
    const double step = std::numbers::pi * std::sin(angle);
    for (std::size_t k = 0; k < n_antennas; ++k) {
        const double ph = step * static_cast<double>(k + 1);
        a[k] = {std::cos(ph), std::sin(ph)};
    }
    return a;
}

// Transmit block Y = v x^T (one beam, N symbols).
inline ComplexMatrix assemble_block(std::span<const cplx> v, std::span<const cplx> x) {
    if (v.empty() || x.empty()) throw DomainError("assemble_block: empty input");
    ComplexMatrix y(v.size(), x.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        for (std::size_t n = 0; n < x.size(); ++n) y(k, n) = v[k] * x[n];
    return y;
}

// |a(angle)^T v|^2.
inline double beam_gain(std::span<const cplx> v, double angle) {
    const auto a = steering_vector(angle, v.size());
    return std::norm(dotu(std::span<const cplx>(a), v));
}

namespace detail {

// Grid sizes proportional to angular width so that region sums are comparable;
// `grid` is the node count assigned to the full [-pi/2, pi/2] span.
inline std::size_t region_grid_points(const AngleRegion& r, std::size_t grid) {
    const double frac = r.width() / std::numbers::pi;
    const auto n = static_cast<std::size_t>(std::llround(frac * static_cast<double>(grid - 1)));
    return n + 1;
}

inline double region_gain_sum(std::span<const cplx> v, const AngleRegion& r, std::size_t pts) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts; ++i) {
        const double a =
            (pts == 1) ? 0.5 * (r.lo + r.hi)
                       : r.lo + (r.hi - r.lo) * static_cast<double>(i) / static_cast<double>(pts - 1);
        s += beam_gain(v, a);
    }
    return s;
}

} // namespace detail

// Fraction of radiated power (grid-summed gain) falling inside `region`,
// relative to the full field of view [-pi/2, pi/2].  Density-matched grids:
// node counts are proportional to angular width, `grid` nodes over the full
// span (default 721, i.e. quarter-degree spacing).
inline double region_power(std::span<const cplx> v, const AngleRegion& region,
                           std::size_t grid = 721) {
    if (grid < 2) throw DomainError("region_power: grid too small");
    if (v.empty()) throw DomainError("region_power: empty beam");
    const std::size_t n_num = detail::region_grid_points(region, grid);
    if (region.width() == 0.0) return 0.0;
    constexpr double half_pi = std::numbers::pi / 2.0;
    const AngleRegion full(-half_pi, half_pi);
    const double num = detail::region_gain_sum(v, region, n_num);
    const double den = detail::region_gain_sum(v, full, grid);
    if (den <= 0.0) throw DomainError("region_power: zero beam power on grid");
    return num / den;
}

// Mean beam gain over a region (uniform grid average); used for
// effective-SNR bookkeeping.
inline double region_average_gain(std::span<const cplx> v, const AngleRegion& region,
                                  std::size_t grid = 721) {
    if (v.empty()) throw DomainError("region_average_gain: empty beam");
    const std::size_t pts = std::max<std::size_t>(detail::region_grid_points(region, grid), 1);
    return detail::region_gain_sum(v, region, pts) / static_cast<double>(pts);
}

} // namespace jcas
