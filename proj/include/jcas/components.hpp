// The four network architectures and the sensing feature layout.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "jcas/complex_matrix.hpp"
#include "jcas/error.hpp"
#include "jcas/mlp.hpp"

namespace jcas {

enum class ComponentKind { beamformer, decoder, angle, detection };

inline const char* component_name(ComponentKind k) {
    switch (k) {
        case ComponentKind::beamformer: return "beamformer";
        case ComponentKind::decoder: return "decoder";
        case ComponentKind::angle: return "angle";
        case ComponentKind::detection: return "detection";
    }
    return "?";
}

// Architecture table:
//   beamformer  4 regions -> {K, K, 2K} -> 2K reals, power-normalized
//   decoder     3 (Re, Im, noise std) -> {10M x4} -> log2 M LLRs
//   angle       2K^2+2 -> {8K, 4K, 4K, K} -> 1, (pi/2) tanh
//   detection   2K^2+2 -> {2K, 2K, K} -> 1, sigmoid with offset
inline MlpSpec build_component(ComponentKind kind, std::size_t n_antennas, std::size_t order) {
    if (n_antennas < 2) throw DomainError("build_component: need at least two antennas");
    std::size_t nbits = 0;
    while ((std::size_t{1} << nbits) < order) ++nbits;
    if (kind == ComponentKind::decoder &&
        ((std::size_t{1} << nbits) != order || nbits == 0 || nbits % 2 != 0))
        throw DomainError("build_component: decoder needs a square QAM order");

    const std::size_t k = n_antennas;
    const std::size_t corr_features = 2 * k * k + 2;
    MlpSpec spec;
    switch (kind) {
        case ComponentKind::beamformer:
            spec.widths = {4, k, k, 2 * k, 2 * k};
            spec.head = Head::beam_normalized;
            break;
        case ComponentKind::decoder:
            spec.widths = {3, 10 * order, 10 * order, 10 * order, 10 * order, nbits};
            spec.head = Head::linear;
            break;
        case ComponentKind::angle:
            spec.widths = {corr_features, 8 * k, 4 * k, 4 * k, k, 1};
            spec.head = Head::scaled_tanh;
            break;
        case ComponentKind::detection:
            spec.widths = {corr_features, 2 * k, 2 * k, k, 1};
            spec.head = Head::sigmoid_offset;
            break;
    }
    spec.validate();
    return spec;
}

// Raw sensing input: Re(corr) row-major, Im(corr) row-major, window length,
// noise standard deviation.  Length 2K^2+2.
inline std::vector<double> sensing_features(const ComplexMatrix& corr, std::size_t window_len,
                                            double noise_std) {
    if (corr.rows() != corr.cols()) throw DomainError("sensing_features: non-square correlation");
    const std::size_t k = corr.rows();
    std::vector<double> f;
    f.reserve(2 * k * k + 2);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) f.push_back(corr(i, j).real());
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) f.push_back(corr(i, j).imag());
    f.push_back(static_cast<double>(window_len));
    f.push_back(noise_std);
    return f;
}

// Network-facing scaling of the raw features: correlation entries divided by
// the noise power, window length by its configured maximum, and the noise
// level as log10 of the noise power.  Fixed here for reproducibility.
inline void scale_sensing_features(std::vector<double>& f, std::size_t n_antennas,
                                   std::size_t window_max) {
    const std::size_t kk2 = 2 * n_antennas * n_antennas;
    if (f.size() != kk2 + 2) throw DomainError("scale_sensing_features: wrong feature length");
    const double sigma = f[kk2 + 1];
    if (!(sigma > 0.0)) throw DomainError("scale_sensing_features: noise std must be > 0");
    const double noise_power = sigma * sigma;
    for (std::size_t i = 0; i < kk2; ++i) f[i] /= noise_power;
    f[kk2] /= static_cast<double>(window_max);
    f[kk2 + 1] = std::log10(noise_power);
}

} // namespace jcas
