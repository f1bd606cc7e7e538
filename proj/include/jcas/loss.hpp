// Training objectives: bit BCE on LLRs, presence BCE on detector
// probabilities, and the angle MSE in its legacy and bound-normalized forms.
// Every loss optionally emits its gradient with respect to the network
// outputs so the callers can seed reverse mode.
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "jcas/error.hpp"
#include "jcas/real_matrix.hpp"

namespace jcas {

struct TradeoffConfig {
    double w_s = 0.5; // sensing weight in the total loss

    void validate() const {
        if (!(w_s >= 0.0 && w_s <= 1.0)) throw DomainError("TradeoffConfig: w_s outside [0,1]");
    }
};

struct LossBreakdown {
    double comm = 0.0;
    double detect = 0.0;
    double angle = 0.0;
    double total = 0.0;
};

namespace detail {

// ln(1 + e^x) without overflow.
inline double softplus(double x) noexcept {
    if (x > 40.0) return x;
    if (x < -40.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

} // namespace detail

// Mean binary cross-entropy of the transmitted bits against sigmoid-of-LLR
// probabilities (natural log).  Positive LLR means "bit 0", so with
// t = (1-2b)*L the per-bit term is ln(1+exp(-t)).  `grad`, when given, is
// filled with dLoss/dLLR (same shape as llrs).
inline double loss_comm(const RealMatrix& llrs, std::span<const std::uint8_t> bits,
                        RealMatrix* grad = nullptr) {
    if (llrs.size() == 0) throw DomainError("loss_comm: empty batch");
    if (bits.size() != llrs.size()) throw DomainError("loss_comm: bits/LLR shape mismatch");
    if (grad) *grad = RealMatrix(llrs.rows(), llrs.cols());
    const double inv = 1.0 / static_cast<double>(llrs.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < llrs.size(); ++i) {
        if (bits[i] > 1) throw DomainError("loss_comm: bits must be 0/1");
        const double sgn = 1.0 - 2.0 * static_cast<double>(bits[i]);
        const double t = sgn * llrs.data()[i];
        loss += detail::softplus(-t);
        if (grad) {
            const double sig = 1.0 / (1.0 + std::exp(t)); // sigmoid(-t)
            grad->data()[i] = -sgn * sig * inv;
        }
    }
    return loss * inv;
}

// Mean BCE of target-presence labels against detector probabilities, clamped
// at 1e-12 away from {0,1}.  `grad` receives dLoss/dp.
inline double loss_detect(std::span<const double> p, std::span<const std::uint8_t> present,
                          std::vector<double>* grad = nullptr) {
    if (p.empty()) throw DomainError("loss_detect: empty batch");
    if (p.size() != present.size()) throw DomainError("loss_detect: label count mismatch");
    constexpr double eps = 1e-12;
    if (grad) grad->assign(p.size(), 0.0);
    const double inv = 1.0 / static_cast<double>(p.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (present[i] > 1) throw DomainError("loss_detect: labels must be 0/1");
        const double pc = std::min(std::max(p[i], eps), 1.0 - eps);
        const double t = static_cast<double>(present[i]);
        loss += -(t * std::log(pc) + (1.0 - t) * std::log(1.0 - pc));
        if (grad) (*grad)[i] = (pc - t) / (pc * (1.0 - pc)) * inv;
    }
    return loss * inv;
}

// Plain mean squared angle error over target-present scenes.  An all-absent
// batch contributes zero and raises `counted_empty`.
inline double loss_angle_legacy(std::span<const double> theta, std::span<const double> theta_hat,
                                std::span<const std::uint8_t> present, bool* counted_empty = nullptr,
                                std::vector<double>* grad = nullptr) {
    if (theta.size() != theta_hat.size() || theta.size() != present.size())
        throw DomainError("loss_angle_legacy: shape mismatch");
    if (grad) grad->assign(theta.size(), 0.0);
    std::size_t n = 0;
    for (std::uint8_t t : present) n += (t != 0);
    if (counted_empty) *counted_empty = (n == 0);
    if (n == 0) return 0.0;
    const double inv = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!present[i]) continue;
        const double e = theta[i] - theta_hat[i];
        loss += e * e;
        if (grad) (*grad)[i] = -2.0 * e * inv;
    }
    return loss * inv;
}

// Bound-normalized angle loss: each target-present scene is weighted by
// n_win / sigma_ns^2, the factor that the estimation bound says governs the
// achievable error variance, so the term's magnitude stays comparable across
// window lengths and noise levels.
inline double loss_angle_normalized(std::span<const double> theta, std::span<const double> theta_hat,
                                    std::span<const std::size_t> n_win,
                                    std::span<const double> noise_sense_std,
                                    std::span<const std::uint8_t> present,
                                    bool* counted_empty = nullptr,
                                    std::vector<double>* grad = nullptr) {
    if (theta.size() != theta_hat.size() || theta.size() != present.size() ||
        theta.size() != n_win.size() || theta.size() != noise_sense_std.size())
        throw DomainError("loss_angle_normalized: shape mismatch");
    if (grad) grad->assign(theta.size(), 0.0);
    std::size_t n = 0;
    for (std::uint8_t t : present) n += (t != 0);
    if (counted_empty) *counted_empty = (n == 0);
    if (n == 0) return 0.0;
    const double inv = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!present[i]) continue;
        if (!(noise_sense_std[i] > 0.0))
            throw DomainError("loss_angle_normalized: noise std must be > 0");
        const double w = static_cast<double>(n_win[i]) / (noise_sense_std[i] * noise_sense_std[i]);
        const double e = theta[i] - theta_hat[i];
        loss += w * e * e;
        if (grad) (*grad)[i] = -2.0 * w * e * inv;
    }
    return loss * inv;
}

// Weighted combination: total = (1-w_s) comm + w_s detect + w_s angle.
inline LossBreakdown total_loss(double comm, double detect, double angle, double w_s) {
    TradeoffConfig{w_s}.validate();
    LossBreakdown b;
    b.comm = comm;
    b.detect = detect;
    b.angle = angle;
    b.total = (1.0 - w_s) * comm + w_s * detect + w_s * angle;
    return b;
}

} // namespace jcas
