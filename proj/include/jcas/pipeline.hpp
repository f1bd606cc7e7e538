// End-to-end differentiable scene pipeline.
//
// One scene = one observation window: the beamformer-weighted QAM block is
// sent simultaneously through the fading downlink (per-symbol demapping) and
// the monostatic sensing return (window autocorrelation -> detector + angle
// estimator).  All channel randomness is frozen inside SceneDraw, so for
// fixed draws the whole batch is a deterministic, differentiable function of
// the four networks' parameters; backward_batch produces exact gradients,
// including through the complex channel algebra (equalizer quotient,
// autocorrelation, beam response).
//
// Complex gradient convention used throughout: for a real loss L and complex
// quantity u, g_u = dL/dRe(u) + j dL/dIm(u).  Holomorphic steps pull back as
// g_in = g_out * conj(f'); mixed steps carry an extra conj(g_out) * df/du~
// term.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "jcas/beam.hpp"
#include "jcas/channel.hpp"
#include "jcas/complex_matrix.hpp"
#include "jcas/components.hpp"
#include "jcas/constellation.hpp"
#include "jcas/error.hpp"
#include "jcas/loss.hpp"
#include "jcas/mlp.hpp"
#include "jcas/rng.hpp"

namespace jcas {

// Experiment-level constants shared by training and evaluation.
struct ScenarioParams {
    std::size_t n_antennas = 16;
    Constellation constellation;      // unit-energy QAM
    AngleRegion comm_region;          // user azimuth support
    AngleRegion sense_region;         // target azimuth support
    double comm_fading_power = 1.0;   // E|alpha_c|^2
    double reflect_power = 1.0;       // E|alpha_s|^2
    double target_prior = 0.5;        // P(target present)
    std::size_t window_max = 15;      // feature scaling anchor
    AngleHold comm_hold = AngleHold::per_symbol;

    void validate() const {
        if (n_antennas < 2) throw DomainError("ScenarioParams: need at least two antennas");
        if (constellation.order < 2) throw DomainError("ScenarioParams: constellation unset");
        if (!(comm_fading_power > 0.0) || !(reflect_power > 0.0))
            throw DomainError("ScenarioParams: channel powers must be > 0");
        if (!(target_prior >= 0.0 && target_prior <= 1.0))
            throw DomainError("ScenarioParams: target prior outside [0,1]");
        if (window_max == 0) throw DomainError("ScenarioParams: window_max must be >= 1");
    }

    SenseLinkParams sense_link(double noise_power) const {
        return SenseLinkParams{reflect_power, noise_power, sense_region, target_prior};
    }
};

// Per-scene randomization ranges used when drawing training batches.
struct SceneSampling {
    std::size_t window_min = 1;
    std::size_t window_max = 15;
    double sense_snr_db_lo = -10.0; // raw sigma_s^2 / sigma_ns^2 range, dB
    double sense_snr_db_hi = 10.0;
    double comm_snr_db_lo = 0.0;    // raw sigma_c^2 / sigma_n^2 range, dB
    double comm_snr_db_hi = 25.0;

    void validate() const {
        if (window_min < 1 || window_min > window_max)
            throw DomainError("SceneSampling: bad window range");
        if (sense_snr_db_lo > sense_snr_db_hi || comm_snr_db_lo > comm_snr_db_hi)
            throw DomainError("SceneSampling: inverted SNR range");
    }
};

// Frozen randomness for one scene.  Draw order (fixed for reproducibility):
// symbol labels; per symbol (azimuth when redrawn, fading, noise); target
// presence/angle/per-symbol reflection gains; sensing noise column-major.
struct SceneDraw {
    std::size_t window_len = 0;
    double noise_comm_power = 1.0;  // sigma_n^2
    double noise_sense_power = 1.0; // sigma_ns^2
    std::vector<unsigned> labels;
    std::vector<double> comm_angles;
    std::vector<cplx> comm_fading;
    std::vector<cplx> comm_noise;
    SensingScene scene;
    ComplexMatrix sense_noise;
};

inline SceneDraw draw_scene(const ScenarioParams& sc, std::size_t window_len,
                            double comm_noise_power, double sense_noise_power, SeededRng& rng) {
    sc.validate();
    if (window_len == 0) throw DomainError("draw_scene: empty window");
    if (!(comm_noise_power > 0.0) || !(sense_noise_power > 0.0))
        throw DomainError("draw_scene: noise powers must be > 0");

    SceneDraw d;
    d.window_len = window_len;
    d.noise_comm_power = comm_noise_power;
    d.noise_sense_power = sense_noise_power;
    d.labels.resize(window_len);
    for (unsigned& l : d.labels) l = static_cast<unsigned>(rng.below(sc.constellation.order));

    d.comm_angles.resize(window_len);
    d.comm_fading.resize(window_len);
    d.comm_noise.resize(window_len);
    double held = 0.0;
    for (std::size_t j = 0; j < window_len; ++j) {
        if (j == 0 || sc.comm_hold == AngleHold::per_symbol)
            held = rng.uniform(sc.comm_region.lo, sc.comm_region.hi);
        d.comm_angles[j] = held;
        d.comm_fading[j] = rng.complex_normal(sc.comm_fading_power);
        d.comm_noise[j] = rng.complex_normal(comm_noise_power);
    }

    d.scene = sample_scene(sc.sense_link(sense_noise_power), window_len, rng);
    d.sense_noise = ComplexMatrix(sc.n_antennas, window_len);
    for (std::size_t j = 0; j < window_len; ++j)
        for (std::size_t i = 0; i < sc.n_antennas; ++i)
            d.sense_noise(i, j) = rng.complex_normal(sense_noise_power);
    return d;
}

// Draws scenes until at least `min_symbols` symbols are covered (the last
// scene may overshoot).  Window length, comm SNR and sensing SNR are drawn
// independently per scene.
inline std::vector<SceneDraw> draw_batch(const ScenarioParams& sc, const SceneSampling& ss,
                                         std::size_t min_symbols, SeededRng& rng) {
    ss.validate();
    if (min_symbols == 0) throw DomainError("draw_batch: empty batch");
    std::vector<SceneDraw> scenes;
    std::size_t covered = 0;
    while (covered < min_symbols) {
        const std::size_t w =
            ss.window_min + rng.below(ss.window_max - ss.window_min + 1);
        const double snr_c = rng.uniform(ss.comm_snr_db_lo, ss.comm_snr_db_hi);
        const double snr_s = rng.uniform(ss.sense_snr_db_lo, ss.sense_snr_db_hi);
        const double noise_c = sc.comm_fading_power * std::pow(10.0, -snr_c / 10.0);
        const double noise_s = sc.reflect_power * std::pow(10.0, -snr_s / 10.0);
        scenes.push_back(draw_scene(sc, w, noise_c, noise_s, rng));
        covered += w;
    }
    return scenes;
}

// The four trainable components.
struct NetworkSet {
    MlpSpec beam_spec, dec_spec, det_spec, ang_spec;
    MlpParams beam, dec, det, ang;

    static NetworkSet build(std::size_t n_antennas, std::size_t order, SeededRng& rng) {
        NetworkSet n;
        n.beam_spec = build_component(ComponentKind::beamformer, n_antennas, order);
        n.dec_spec = build_component(ComponentKind::decoder, n_antennas, order);
        n.det_spec = build_component(ComponentKind::detection, n_antennas, order);
        n.ang_spec = build_component(ComponentKind::angle, n_antennas, order);
        SeededRng r1 = rng.substream(1), r2 = rng.substream(2);
        SeededRng r3 = rng.substream(3), r4 = rng.substream(4);
        n.beam = glorot_init(n.beam_spec, r1);
        n.dec = glorot_init(n.dec_spec, r2);
        n.det = glorot_init(n.det_spec, r3);
        n.ang = glorot_init(n.ang_spec, r4);
        return n;
    }
};

// Beamformer input row: communication region edges then sensing region edges,
// radians.
inline RealMatrix beam_input(const ScenarioParams& sc) {
    RealMatrix in(1, 4);
    in(0, 0) = sc.comm_region.lo;
    in(0, 1) = sc.comm_region.hi;
    in(0, 2) = sc.sense_region.lo;
    in(0, 3) = sc.sense_region.hi;
    return in;
}

// Runs the beamformer network; the first half of the output row is the real
// part of the weight vector, the second half the imaginary part.  The head
// guarantees unit total power.
inline BeamWeights compute_beam(const MlpSpec& spec, const MlpParams& params,
                                const ScenarioParams& sc, MlpCache* cache = nullptr) {
    const RealMatrix out = forward(spec, params, beam_input(sc), cache);
    const std::size_t k = out.cols() / 2;
    if (k != sc.n_antennas) throw DomainError("compute_beam: beamformer width != 2K");
    BeamWeights v;
    v.w.resize(k);
    for (std::size_t i = 0; i < k; ++i) v.w[i] = cplx{out(0, i), out(0, k + i)};
    return v;
}

struct BatchOptions {
    double w_s = 0.5;
    bool comm_active = true;
    bool detect_active = true;
    bool angle_active = true;
    bool with_caches = false;              // keep NN caches for backward
    std::span<const double> t_offsets = {}; // per-scene pre-sigmoid offsets; empty = zeros
};

// Everything produced by one batched forward pass, per symbol and per scene.
struct BatchForward {
    std::size_t n_scenes = 0, n_symbols = 0, n_targets = 0;
    bool with_caches = false;

    BeamWeights beam;
    MlpCache beam_cache;

    // Per symbol, concatenated across scenes in scene order.
    std::vector<unsigned> labels;
    std::vector<std::uint8_t> bits; // n_symbols * bits_per_symbol, most significant first
    std::vector<cplx> tx, kappa, z, zhat;
    std::vector<double> sigma_zf;
    std::vector<std::uint8_t> zf_clamped;
    std::vector<double> comm_angles;  // frozen draws, needed again in backward
    std::vector<cplx> comm_fading;
    std::vector<cplx> scene_gains;
    MlpCache dec_cache;
    RealMatrix llrs; // n_symbols x bits_per_symbol

    // Per scene.
    std::vector<std::size_t> sym_begin; // scene -> first symbol index
    std::vector<std::size_t> window;
    std::vector<std::uint8_t> present;
    std::vector<double> theta_true;
    std::vector<double> noise_comm_power;
    std::vector<double> noise_sense_std;
    std::vector<ComplexMatrix> zs, corr;
    RealMatrix sense_in; // scaled features
    std::vector<double> det_logits; // raw head input, before the offset
    std::vector<double> p_detect, theta_hat;
    MlpCache det_cache, ang_cache;
};

namespace detail {

// Post-equalization noise std sigma_n/|kappa|, clamped so a faded-out symbol
// cannot blow up the decoder input.
constexpr double zf_noise_cap = 100.0;

} // namespace detail

inline BatchForward forward_batch(const NetworkSet& nets, const ScenarioParams& sc,
                                  std::span<const SceneDraw> scenes, const BatchOptions& opt) {
    sc.validate();
    TradeoffConfig{opt.w_s}.validate();
    if (scenes.empty()) throw DomainError("forward_batch: no scenes");
    if (!opt.t_offsets.empty() && opt.t_offsets.size() != scenes.size())
        throw DomainError("forward_batch: offset count != scene count");

    BatchForward f;
    f.with_caches = opt.with_caches;
    f.n_scenes = scenes.size();
    for (const SceneDraw& d : scenes) f.n_symbols += d.window_len;

    const std::size_t k = sc.n_antennas;
    const std::size_t nbits = sc.constellation.bits_per_symbol;

    f.beam = compute_beam(nets.beam_spec, nets.beam, sc, opt.with_caches ? &f.beam_cache : nullptr);

    f.labels.reserve(f.n_symbols);
    f.bits.reserve(f.n_symbols * nbits);
    f.tx.reserve(f.n_symbols);
    f.kappa.reserve(f.n_symbols);
    f.z.reserve(f.n_symbols);
    f.zhat.reserve(f.n_symbols);
    f.sigma_zf.reserve(f.n_symbols);
    f.zf_clamped.reserve(f.n_symbols);
    f.comm_angles.reserve(f.n_symbols);
    f.comm_fading.reserve(f.n_symbols);
    f.scene_gains.reserve(f.n_symbols);
    f.sym_begin.reserve(f.n_scenes);
    f.window.reserve(f.n_scenes);
    f.present.reserve(f.n_scenes);
    f.theta_true.reserve(f.n_scenes);
    f.noise_comm_power.reserve(f.n_scenes);
    f.noise_sense_std.reserve(f.n_scenes);
    f.zs.reserve(f.n_scenes);
    f.corr.reserve(f.n_scenes);

    RealMatrix dec_in;
    if (opt.comm_active) dec_in = RealMatrix(f.n_symbols, 3);
    const bool sensing = opt.detect_active || opt.angle_active;
    if (sensing) f.sense_in = RealMatrix(f.n_scenes, 2 * k * k + 2);

    std::size_t sym = 0;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        const SceneDraw& d = scenes[s];
        if (d.labels.size() != d.window_len || d.sense_noise.rows() != k ||
            d.sense_noise.cols() != d.window_len)
            throw DomainError("forward_batch: malformed scene draw");
        f.sym_begin.push_back(sym);
        f.window.push_back(d.window_len);
        f.present.push_back(d.scene.target_present ? 1 : 0);
        f.n_targets += d.scene.target_present;
        f.theta_true.push_back(d.scene.angle);
        f.noise_comm_power.push_back(d.noise_comm_power);
        const double sigma_ns = std::sqrt(d.noise_sense_power);
        f.noise_sense_std.push_back(sigma_ns);

        const auto a_tgt = steering_vector(d.scene.angle, k);
        const cplx t_s = dotu(std::span<const cplx>(a_tgt), std::span<const cplx>(f.beam.w));

        ComplexMatrix zsm(k, d.window_len);
        for (std::size_t j = 0; j < d.window_len; ++j, ++sym) {
            const unsigned label = d.labels[j];
            const cplx x = sc.constellation.points.at(label);
            f.labels.push_back(label);
            for (std::size_t b = 0; b < nbits; ++b)
                f.bits.push_back(static_cast<std::uint8_t>((label >> (nbits - 1 - b)) & 1u));
            f.tx.push_back(x);

            if (opt.comm_active) {
                // Downlink symbol: z = kappa x + w with kappa = (a(phi)^T v) alpha.
                const auto a_usr = steering_vector(d.comm_angles[j], k);
                const cplx t_c =
                    dotu(std::span<const cplx>(a_usr), std::span<const cplx>(f.beam.w));
                const cplx kap = t_c * d.comm_fading[j];
                const cplx zj = kap * x + d.comm_noise[j];
                const double dd = std::norm(kap) + d.noise_comm_power;
                const cplx zh = std::conj(kap) * zj / dd;
                const double akap = std::abs(kap);
                const double sigma_n = std::sqrt(d.noise_comm_power);
                const double raw_zf = akap > 0.0 ? sigma_n / akap : detail::zf_noise_cap;
                const bool clamped = !(raw_zf < detail::zf_noise_cap);
                f.kappa.push_back(kap);
                f.z.push_back(zj);
                f.zhat.push_back(zh);
                f.sigma_zf.push_back(clamped ? detail::zf_noise_cap : raw_zf);
                f.zf_clamped.push_back(clamped ? 1 : 0);
                f.comm_angles.push_back(d.comm_angles[j]);
                f.comm_fading.push_back(d.comm_fading[j]);
                dec_in(sym, 0) = zh.real();
                dec_in(sym, 1) = zh.imag();
                dec_in(sym, 2) = f.sigma_zf.back();
            }
            f.scene_gains.push_back(d.scene.gains[j]);

            // Monostatic return column: T (a^T y_j) alpha_j a + noise.
            const cplx amp = d.scene.target_present ? t_s * x * d.scene.gains[j] : cplx{};
            for (std::size_t i = 0; i < k; ++i) zsm(i, j) = amp * a_tgt[i] + d.sense_noise(i, j);
        }

        if (sensing) {
            ComplexMatrix c = acm(zsm);
            std::vector<double> feat = sensing_features(c, d.window_len, sigma_ns);
            scale_sensing_features(feat, k, sc.window_max);
            for (std::size_t i = 0; i < feat.size(); ++i) f.sense_in(s, i) = feat[i];
            f.corr.push_back(std::move(c));
        }
        f.zs.push_back(std::move(zsm));
    }

    if (opt.comm_active)
        f.llrs = forward(nets.dec_spec, nets.dec, dec_in, opt.with_caches ? &f.dec_cache : nullptr);

    if (opt.detect_active) {
        std::vector<double> offs(f.n_scenes, 0.0);
        if (!opt.t_offsets.empty()) offs.assign(opt.t_offsets.begin(), opt.t_offsets.end());
        MlpCache cache;
        const RealMatrix p = forward(nets.det_spec, nets.det, f.sense_in, &cache, offs);
        const RealMatrix& raw = cache.pre.back();
        f.det_logits.assign(raw.data(), raw.data() + raw.size());
        f.p_detect.assign(p.data(), p.data() + p.size());
        if (opt.with_caches) f.det_cache = std::move(cache);
    }
    if (opt.angle_active) {
        const RealMatrix th =
            forward(nets.ang_spec, nets.ang, f.sense_in, opt.with_caches ? &f.ang_cache : nullptr);
        f.theta_hat.assign(th.data(), th.data() + th.size());
    }
    return f;
}

// Gradient seeds of the scalar losses with respect to the network outputs.
struct LossSeeds {
    RealMatrix g_llr;
    std::vector<double> g_p;
    std::vector<double> g_theta;
};

// Loss evaluation on a completed forward.  Inactive terms contribute zero to
// the breakdown and produce no seeds.
inline LossBreakdown compute_losses(const BatchForward& f, const BatchOptions& opt,
                                    bool* angle_empty = nullptr, LossSeeds* seeds = nullptr) {
    double comm = 0.0, detect = 0.0, angle = 0.0;
    if (opt.comm_active) comm = loss_comm(f.llrs, f.bits, seeds ? &seeds->g_llr : nullptr);
    if (opt.detect_active)
        detect = loss_detect(f.p_detect, f.present, seeds ? &seeds->g_p : nullptr);
    if (angle_empty) *angle_empty = false;
    if (opt.angle_active)
        angle = loss_angle_normalized(f.theta_true, f.theta_hat, f.window, f.noise_sense_std,
                                      f.present, angle_empty, seeds ? &seeds->g_theta : nullptr);
    return total_loss(comm, detect, angle, opt.w_s);
}

struct ComponentGrads {
    MlpGradients beam, dec, det, ang;
};

// Exact reverse pass for the whole batch.  Requires forward_batch to have
// been run with caches.
inline ComponentGrads backward_batch(const NetworkSet& nets, const ScenarioParams& sc,
                                     const BatchForward& f, const BatchOptions& opt,
                                     const LossSeeds& seeds) {
    if (!f.with_caches) throw DomainError("backward_batch: forward ran without caches");
    const std::size_t k = sc.n_antennas;
    std::vector<cplx> g_v(k, cplx{});

    // ---- communication path -------------------------------------------
    MlpGradients dec_grads = zero_gradients(nets.dec_spec);
    if (opt.comm_active) {
        RealMatrix dec_up = seeds.g_llr;
        for (std::size_t i = 0; i < dec_up.size(); ++i) dec_up.data()[i] *= (1.0 - opt.w_s);
        dec_grads = backward(nets.dec_spec, nets.dec, f.dec_cache, dec_up);
    }

    for (std::size_t s = 0; opt.comm_active && s < f.n_scenes; ++s) {
        const std::size_t begin = f.sym_begin[s];
        const double noise_pow = f.noise_comm_power[s];
        const double sigma_n = std::sqrt(noise_pow);
        for (std::size_t j = 0; j < f.window[s]; ++j) {
            const std::size_t sym = begin + j;
            const cplx g_zhat{dec_grads.input(sym, 0), dec_grads.input(sym, 1)};
            const double g_sig = dec_grads.input(sym, 2);
            const cplx kap = f.kappa[sym];
            const cplx zj = f.z[sym];
            const double dd = std::norm(kap) + noise_pow;

            // z-hat = conj(kappa) z / (|kappa|^2 + sigma_n^2).
            const cplx g_z = g_zhat * kap / dd;
            cplx g_kap = (-g_zhat * kap * kap * std::conj(zj) +
                          std::conj(g_zhat) * zj * noise_pow) /
                         (dd * dd);
            if (!f.zf_clamped[sym]) {
                const double akap = std::abs(kap);
                g_kap += g_sig * (-sigma_n / (akap * akap * akap)) * kap;
            }
            g_kap += g_z * std::conj(f.tx[sym]); // z = kappa x + w

            // kappa = (a(phi)^T v) alpha.
            const cplx g_tc = g_kap * std::conj(f.comm_fading[sym]);
            const auto a_usr = steering_vector(f.comm_angles[sym], k);
            for (std::size_t i = 0; i < k; ++i) g_v[i] += g_tc * std::conj(a_usr[i]);
        }
    }

    // ---- sensing path ---------------------------------------------------
    MlpGradients det_grads = zero_gradients(nets.det_spec);
    MlpGradients ang_grads = zero_gradients(nets.ang_spec);
    RealMatrix feat_grad; // dL/d(scaled features), summed over both heads
    if (opt.detect_active) {
        RealMatrix up(f.n_scenes, 1);
        for (std::size_t s = 0; s < f.n_scenes; ++s) up(s, 0) = opt.w_s * seeds.g_p[s];
        det_grads = backward(nets.det_spec, nets.det, f.det_cache, up);
        feat_grad = det_grads.input;
    }
    if (opt.angle_active) {
        RealMatrix up(f.n_scenes, 1);
        for (std::size_t s = 0; s < f.n_scenes; ++s) up(s, 0) = opt.w_s * seeds.g_theta[s];
        ang_grads = backward(nets.ang_spec, nets.ang, f.ang_cache, up);
        if (feat_grad.size() == 0) {
            feat_grad = ang_grads.input;
        } else {
            for (std::size_t i = 0; i < feat_grad.size(); ++i)
                feat_grad.data()[i] += ang_grads.input.data()[i];
        }
    }

    if (feat_grad.size() != 0) {
        for (std::size_t s = 0; s < f.n_scenes; ++s) {
            if (!f.present[s]) continue; // no beam dependence without a target
            const double sig2 = f.noise_sense_std[s] * f.noise_sense_std[s];
            const std::size_t n = f.window[s];
            const ComplexMatrix& zsm = f.zs[s];

            // Scaled correlation features: f_re/f_im = C(i,j)/sigma^2.
            ComplexMatrix g_c(k, k);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    g_c(i, j) = cplx{feat_grad(s, i * k + j), feat_grad(s, k * k + i * k + j)} /
                                sig2;
            // C = (1/N) Z Z^H  ->  g_Z = (1/N)(g_C + g_C^H) Z.
            ComplexMatrix g_z(k, n);
            const double inv = 1.0 / static_cast<double>(n);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    cplx acc{};
                    for (std::size_t l = 0; l < k; ++l)
                        acc += (g_c(i, l) + std::conj(g_c(l, i))) * zsm(l, j);
                    g_z(i, j) = acc * inv;
                }

            // Column n of Z is (a^T v) (x_n alpha_n) a + noise.
            const auto a_tgt = steering_vector(f.theta_true[s], k);
            cplx g_ts{};
            const std::size_t begin = f.sym_begin[s];
            for (std::size_t j = 0; j < n; ++j) {
                cplx ah_g{};
                for (std::size_t i = 0; i < k; ++i) ah_g += std::conj(a_tgt[i]) * g_z(i, j);
                g_ts += std::conj(f.scene_gains[begin + j] * f.tx[begin + j]) * ah_g;
            }
            for (std::size_t i = 0; i < k; ++i) g_v[i] += g_ts * std::conj(a_tgt[i]);
        }
    }

    // ---- beamformer ------------------------------------------------------
    RealMatrix beam_up(1, 2 * k);
    for (std::size_t i = 0; i < k; ++i) {
        beam_up(0, i) = g_v[i].real();
        beam_up(0, k + i) = g_v[i].imag();
    }
    ComponentGrads out;
    out.beam = backward(nets.beam_spec, nets.beam, f.beam_cache, beam_up);
    out.dec = std::move(dec_grads);
    out.det = std::move(det_grads);
    out.ang = std::move(ang_grads);
    return out;
}

} // namespace jcas
