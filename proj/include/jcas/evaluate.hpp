// Metric computation for trained systems and classical baselines: bit error
// rate and bitwise mutual information over a comm SNR grid, detection and
// angle-estimation quality over a sensing grid, and beampattern tables with
// region power fractions.  Baselines run on the same channel realizations as
// the networks (common random numbers), so paired differences have reduced
// Monte-Carlo variance.  Every grid point uses its own rng substream, making
// rows reproducible independently of evaluation order.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "jcas/calibrate.hpp"
#include "jcas/classic.hpp"
#include "jcas/metrics.hpp"
#include "jcas/pipeline.hpp"

namespace jcas {

namespace detail {

// Streaming mean / standard-error accumulator.
struct Accum {
    double sum = 0.0, sumsq = 0.0;
    std::size_t n = 0;

    void add(double x) {
        sum += x;
        sumsq += x * x;
        n += 1;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double std_err() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double var = std::max(0.0, (sumsq - static_cast<double>(n) * m * m) /
                                             static_cast<double>(n - 1));
        return std::sqrt(var / static_cast<double>(n));
    }
};

struct BinomAccum {
    std::size_t hits = 0, n = 0;

    void add(bool hit) {
        hits += hit ? 1 : 0;
        n += 1;
    }
    double mean() const { return n ? static_cast<double>(hits) / static_cast<double>(n) : 0.0; }
    double std_err() const {
        if (n < 1) return 0.0;
        const double p = mean();
        return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
    }
};

inline MetricRow make_row(std::optional<double> snr_db, std::optional<double> snr_eff_db,
                          std::optional<std::size_t> n_win, std::optional<double> w_s,
                          std::string metric, double value, std::size_t n, double std_err) {
    MetricRow r;
    r.snr_db = snr_db;
    r.snr_eff_db = snr_eff_db;
    r.n_win = n_win;
    r.w_s = w_s;
    r.metric = std::move(metric);
    r.value = value;
    r.n = n;
    r.std_err = std_err;
    r.validate();
    return r;
}

// Root-mean-square error with a delta-method standard error, from an
// accumulator over squared errors.
inline void push_rmse_row(std::vector<MetricRow>& rows, const Accum& sq,
                          std::optional<double> snr, std::optional<double> snr_eff,
                          std::optional<std::size_t> n_win, std::optional<double> w_s,
                          const std::string& name) {
    if (sq.n < 1) return;
    const double rmse = std::sqrt(std::max(0.0, sq.mean()));
    const double se = rmse > 0.0 ? sq.std_err() / (2.0 * rmse) : 0.0;
    rows.push_back(make_row(snr, snr_eff, n_win, w_s, name, rmse, sq.n, se));
}

// Per-symbol bitwise-information contribution: m - sum_b log2(1 + e^{-t_b}).
inline double symbol_bmi(std::span<const double> llrs, std::span<const std::uint8_t> bits) {
    double acc = static_cast<double>(llrs.size());
    for (std::size_t b = 0; b < llrs.size(); ++b) {
        const double t = (bits[b] ? -1.0 : 1.0) * llrs[b];
        const double u = -t;
        const double l2 = u > 35.0 ? u / std::numbers::ln2 : std::log1p(std::exp(u)) / std::numbers::ln2;
        acc -= l2;
    }
    return acc;
}

} // namespace detail

// Communication metrics over an SNR grid.  Raw SNR is 1/sigma_n^2 (unit
// fading and symbol power); the corrected column adds the mean beamforming
// gain over the comm region.  Bit decisions: LLR > 0 decides bit 0.  The
// exact demapper runs on the same realizations and is reported alongside.
inline std::vector<MetricRow> eval_comm(const NetworkSet& nets, const ScenarioParams& sc,
                                        std::span<const double> snr_grid_db,
                                        std::size_t n_symbols, std::uint64_t seed,
                                        std::optional<double> w_s_tag = std::nullopt) {
    sc.validate();
    if (n_symbols == 0) throw ConfigError("eval_comm: zero symbols per grid point");
    if (snr_grid_db.empty()) throw ConfigError("eval_comm: empty SNR grid");

    const std::size_t m = sc.constellation.bits_per_symbol;
    const BeamWeights v = compute_beam(nets.beam_spec, nets.beam, sc);
    const double gain_db = 10.0 * std::log10(region_average_gain(v.w, sc.comm_region));

    BatchOptions opt;
    opt.comm_active = true;
    opt.detect_active = false;
    opt.angle_active = false;

    SeededRng base(seed, rng_stream::eval_comm);
    std::vector<MetricRow> rows;
    for (std::size_t pt = 0; pt < snr_grid_db.size(); ++pt) {
        const double snr_db = snr_grid_db[pt];
        const double noise_power = sc.comm_fading_power * std::pow(10.0, -snr_db / 10.0);
        SeededRng rng = base.substream(pt);

        detail::BinomAccum ber, ber_oracle;
        detail::Accum bmi, bmi_oracle;
        std::size_t done = 0;
        while (done < n_symbols) {
            const std::size_t chunk = std::min<std::size_t>(n_symbols - done, 8192);
            std::vector<SceneDraw> scenes;
            scenes.reserve(chunk);
            for (std::size_t i = 0; i < chunk; ++i)
                scenes.push_back(draw_scene(sc, 1, noise_power, 1.0, rng));
            const BatchForward fwd = forward_batch(nets, sc, scenes, opt);

            for (std::size_t i = 0; i < fwd.n_symbols; ++i) {
                const double* l = &fwd.llrs(i, 0);
                const std::uint8_t* b = &fwd.bits[i * m];
                for (std::size_t j = 0; j < m; ++j) {
                    const std::uint8_t decided = l[j] > 0.0 ? 0 : 1;
                    ber.add(decided != b[j]);
                }
                bmi.add(detail::symbol_bmi({l, m}, {b, m}));

                const std::vector<double> lo =
                    exact_llr(fwd.zhat[i], fwd.kappa[i], noise_power, sc.constellation);
                for (std::size_t j = 0; j < m; ++j) {
                    const std::uint8_t decided = lo[j] > 0.0 ? 0 : 1;
                    ber_oracle.add(decided != b[j]);
                }
                bmi_oracle.add(detail::symbol_bmi(lo, {b, m}));
            }
            done += fwd.n_symbols;
        }

        const double md = static_cast<double>(m);
        using detail::make_row;
        rows.push_back(make_row(snr_db, snr_db + gain_db, std::nullopt, w_s_tag, "ber",
                                ber.mean(), ber.n, ber.std_err()));
        rows.push_back(make_row(snr_db, snr_db + gain_db, std::nullopt, w_s_tag, "bmi",
                                std::clamp(bmi.mean(), 0.0, md), bmi.n, bmi.std_err()));
        rows.push_back(make_row(snr_db, snr_db + gain_db, std::nullopt, w_s_tag, "ber_oracle",
                                ber_oracle.mean(), ber_oracle.n, ber_oracle.std_err()));
        rows.push_back(make_row(snr_db, snr_db + gain_db, std::nullopt, w_s_tag, "bmi_oracle",
                                std::clamp(bmi_oracle.mean(), 0.0, md), bmi_oracle.n,
                                bmi_oracle.std_err()));
    }
    return rows;
}

// Sensing metrics over an (SNR, window length) grid: detection and false
// alarm of the calibrated network detector, RMSE and bias of the network
// angle estimator, with the power detector, the subspace baseline, and the
// estimation bound evaluated on the identical realizations.
inline std::vector<MetricRow> eval_sensing(const NetworkSet& nets, const ScenarioParams& sc,
                                           const CalibrationTable& table, double np_false_alarm,
                                           std::span<const double> snr_grid_db,
                                           std::span<const std::size_t> n_win_grid,
                                           std::size_t n_scenes, std::uint64_t seed,
                                           std::optional<double> w_s_tag = std::nullopt) {
    sc.validate();
    if (n_scenes == 0) throw ConfigError("eval_sensing: zero scenes per grid point");
    if (snr_grid_db.empty() || n_win_grid.empty())
        throw ConfigError("eval_sensing: empty evaluation grid");
    for (std::size_t n : n_win_grid)
        if (!table.offsets.contains(n))
            throw ConfigError("eval_sensing: no calibrated threshold for window length " +
                              std::to_string(n) + "; run calibration first");

    const BeamWeights v = compute_beam(nets.beam_spec, nets.beam, sc);
    const double gain_db = 10.0 * std::log10(region_average_gain(v.w, sc.sense_region));

    SeededRng base(seed, rng_stream::eval_sense);
    std::vector<MetricRow> rows;
    std::size_t pt = 0;
    for (const double snr_db : snr_grid_db) {
        const double noise_power = sc.reflect_power * std::pow(10.0, -snr_db / 10.0);
        for (const std::size_t n_win : n_win_grid) {
            SeededRng rng = base.substream(pt++);
            const double t_off = table.offset_for(n_win);

            detail::BinomAccum pd, pf, np_pd, np_pf;
            detail::Accum bias, sq, esprit_bias, esprit_sq, crb_acc;
            BatchOptions opt;
            opt.comm_active = false;
            opt.detect_active = true;
            opt.angle_active = true;

            std::size_t done = 0;
            while (done < n_scenes) {
                const std::size_t chunk = std::min<std::size_t>(n_scenes - done, 1024);
                std::vector<SceneDraw> scenes;
                scenes.reserve(chunk);
                for (std::size_t i = 0; i < chunk; ++i)
                    scenes.push_back(draw_scene(sc, n_win, 1.0, noise_power, rng));
                const std::vector<double> offs(chunk, t_off);
                BatchOptions o = opt;
                o.t_offsets = offs;
                const BatchForward fwd = forward_batch(nets, sc, scenes, o);

                for (std::size_t s = 0; s < fwd.n_scenes; ++s) {
                    const bool truth = fwd.present[s];
                    const bool nn_hit = nn_detects(fwd.det_logits[s], t_off);
                    const bool np_hit = np_detect(fwd.zs[s], noise_power, np_false_alarm).detected;
                    (truth ? pd : pf).add(nn_hit);
                    (truth ? np_pd : np_pf).add(np_hit);
                    if (truth) {
                        const double err = fwd.theta_hat[s] - fwd.theta_true[s];
                        bias.add(err);
                        sq.add(err * err);
                        const double e_ang = esprit_aoa(fwd.corr[s]).angle;
                        const double e_err = e_ang - fwd.theta_true[s];
                        esprit_bias.add(e_err);
                        esprit_sq.add(e_err * e_err);
                        CrbInputs ci;
                        ci.angle = fwd.theta_true[s];
                        ci.noise_power = noise_power;
                        ci.reflect_power = sc.reflect_power;
                        ci.beam_gain = beam_gain(v.w, fwd.theta_true[s]);
                        ci.n_antennas = sc.n_antennas;
                        ci.window_len = n_win;
                        crb_acc.add(crb(ci));
                    }
                }
                done += chunk;
            }

            using detail::make_row;
            const double snr_eff = snr_db + gain_db;
            if (pd.n)
                rows.push_back(make_row(snr_db, snr_eff, n_win, w_s_tag, "pd", pd.mean(), pd.n,
                                        pd.std_err()));
            if (pf.n)
                rows.push_back(make_row(snr_db, snr_eff, n_win, w_s_tag, "pf", pf.mean(), pf.n,
                                        pf.std_err()));
            if (np_pd.n)
                rows.push_back(make_row(snr_db, snr_eff, n_win, w_s_tag, "np_pd", np_pd.mean(),
                                        np_pd.n, np_pd.std_err()));
            if (np_pf.n)
                rows.push_back(make_row(snr_db, snr_eff, n_win, w_s_tag, "np_pf", np_pf.mean(),
                                        np_pf.n, np_pf.std_err()));
            detail::push_rmse_row(rows, sq, snr_db, snr_eff, n_win, w_s_tag, "rmse");
            if (bias.n)
                rows.push_back(make_row(snr_db, snr_eff, n_win, w_s_tag, "bias", bias.mean(),
                                        bias.n, bias.std_err()));
            detail::push_rmse_row(rows, esprit_sq, snr_db, snr_eff, n_win, w_s_tag, "esprit_rmse");
            if (esprit_bias.n)
                rows.push_back(make_row(snr_db, snr_eff, n_win, w_s_tag, "esprit_bias",
                                        esprit_bias.mean(), esprit_bias.n, esprit_bias.std_err()));
            detail::push_rmse_row(rows, crb_acc, snr_db, snr_eff, n_win, w_s_tag, "crb_rmse");
        }
    }
    return rows;
}

// Classical chain alone, with a per-scene matched transmit beam (gain K
// toward the true target angle): the standard illumination benchmark for the
// power detector, the subspace estimator, and the bound.
inline std::vector<MetricRow> eval_baseline(const ScenarioParams& sc, double false_alarm,
                                            std::span<const double> snr_grid_db,
                                            std::span<const std::size_t> n_win_grid,
                                            std::size_t n_scenes, std::uint64_t seed) {
    sc.validate();
    if (n_scenes == 0) throw ConfigError("eval_baseline: zero scenes per grid point");
    if (snr_grid_db.empty() || n_win_grid.empty())
        throw ConfigError("eval_baseline: empty evaluation grid");
    if (!(false_alarm > 0.0 && false_alarm < 1.0))
        throw ConfigError("eval_baseline: false-alarm target must lie in (0,1)");

    const std::size_t k = sc.n_antennas;
    const std::size_t m = sc.constellation.bits_per_symbol;
    const double matched_gain_db = 10.0 * std::log10(static_cast<double>(k));

    SeededRng base(seed, rng_stream::eval_baseline);
    std::vector<MetricRow> rows;
    std::size_t pt = 0;
    for (const double snr_db : snr_grid_db) {
        const double noise_power = sc.reflect_power * std::pow(10.0, -snr_db / 10.0);
        for (const std::size_t n_win : n_win_grid) {
            SeededRng rng = base.substream(pt++);
            detail::BinomAccum np_pd, np_pf;
            detail::Accum esprit_bias, esprit_sq, crb_acc;

            std::vector<std::uint8_t> bits(m);
            for (std::size_t s = 0; s < n_scenes; ++s) {
                const SensingScene scene = sample_scene(sc.sense_link(noise_power), n_win, rng);
                const auto a = steering_vector(scene.angle, k);
                BeamWeights v;
                v.w.resize(k);
                const double inv = 1.0 / std::sqrt(static_cast<double>(k));
                for (std::size_t i = 0; i < k; ++i) v.w[i] = std::conj(a[i]) * inv;

                std::vector<cplx> x(n_win);
                for (std::size_t j = 0; j < n_win; ++j) {
                    for (std::uint8_t& b : bits) b = rng.bernoulli(0.5) ? 1 : 0;
                    x[j] = modulate(bits, sc.constellation);
                }
                const ComplexMatrix y = assemble_block(v.w, x);
                const ComplexMatrix zs = sense_channel(y, scene, sc.sense_link(noise_power), rng);

                const bool hit = np_detect(zs, noise_power, false_alarm).detected;
                (scene.target_present ? np_pd : np_pf).add(hit);
                if (scene.target_present) {
                    const double err = esprit_aoa(acm(zs)).angle - scene.angle;
                    esprit_bias.add(err);
                    esprit_sq.add(err * err);
                    CrbInputs ci;
                    ci.angle = scene.angle;
                    ci.noise_power = noise_power;
                    ci.reflect_power = sc.reflect_power;
                    ci.beam_gain = static_cast<double>(k);
                    ci.n_antennas = k;
                    ci.window_len = n_win;
                    crb_acc.add(crb(ci));
                }
            }

            using detail::make_row;
            const double snr_eff = snr_db + matched_gain_db;
            if (np_pd.n)
                rows.push_back(make_row(snr_db, snr_eff, n_win, std::nullopt, "np_pd",
                                        np_pd.mean(), np_pd.n, np_pd.std_err()));
            if (np_pf.n)
                rows.push_back(make_row(snr_db, snr_eff, n_win, std::nullopt, "np_pf",
                                        np_pf.mean(), np_pf.n, np_pf.std_err()));
            detail::push_rmse_row(rows, esprit_sq, snr_db, snr_eff, n_win, std::nullopt,
                                  "esprit_rmse");
            if (esprit_bias.n)
                rows.push_back(make_row(snr_db, snr_eff, n_win, std::nullopt, "esprit_bias",
                                        esprit_bias.mean(), esprit_bias.n,
                                        esprit_bias.std_err()));
            detail::push_rmse_row(rows, crb_acc, snr_db, snr_eff, n_win, std::nullopt, "crb_rmse");
        }
    }
    return rows;
}

// Gain table on a uniform angle grid plus the power split between the
// sensing region, the comm region, and everything else.  All three shares
// come from one partition of the same grid sum, so they add to one exactly.
// Overlapping regions are attributed to sensing.
struct BeampatternResult {
    std::vector<double> angles_deg;
    std::vector<double> gains;
    double frac_sense = 0.0, frac_comm = 0.0, frac_outside = 0.0;
};

inline BeampatternResult eval_beampattern(const BeamWeights& v, const AngleRegion& sense,
                                          const AngleRegion& comm, std::size_t grid = 721) {
    if (v.size() == 0) throw DomainError("eval_beampattern: empty beam");
    if (grid < 2) throw DomainError("eval_beampattern: grid too small");
    if (!v.is_normalized(1e-6)) throw DomainError("eval_beampattern: weights must be normalized");

    BeampatternResult r;
    r.angles_deg.resize(grid);
    r.gains.resize(grid);
    constexpr double half_pi = std::numbers::pi / 2.0;
    double s_sense = 0.0, s_comm = 0.0, s_out = 0.0, total = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
        const double theta =
            -half_pi + std::numbers::pi * static_cast<double>(i) / static_cast<double>(grid - 1);
        const double g = beam_gain(v.w, theta);
        r.angles_deg[i] = theta * 180.0 / std::numbers::pi;
        r.gains[i] = g;
        if (theta >= sense.lo && theta <= sense.hi)
            s_sense += g;
        else if (theta >= comm.lo && theta <= comm.hi)
            s_comm += g;
        else
            s_out += g;
        total += g;
    }
    if (total <= 0.0) throw NumericalError("eval_beampattern: zero radiated power on grid");
    r.frac_sense = s_sense / total;
    r.frac_comm = s_comm / total;
    r.frac_outside = s_out / total;
    return r;
}

inline std::string emit_beampattern_csv(const BeampatternResult& r,
                                        std::span<const std::string> stamps = {}) {
    std::ostringstream os;
    for (const std::string& s : stamps) os << "# " << s << '\n';
    char buf[128];
    std::snprintf(buf, sizeof buf, "# frac_sense=%.17g frac_comm=%.17g frac_outside=%.17g",
                  r.frac_sense, r.frac_comm, r.frac_outside);
    os << buf << '\n';
    os << "angle_deg,gain\n";
    for (std::size_t i = 0; i < r.angles_deg.size(); ++i)
        os << detail::csv_num(r.angles_deg[i]) << ',' << detail::csv_num(r.gains[i]) << '\n';
    return os.str();
}

} // namespace jcas
