// Threshold limiting: with all network weights frozen, run target-absent
// scenes for each window length, collect the detector's raw logits, and pick
// the pre-sigmoid offset that pins the false-alarm rate at the target.
// The detection decision everywhere is strict (p > 1/2, i.e. logit > -T_off),
// so a degenerate constant logit distribution yields zero false alarms.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "jcas/calibration.hpp"
#include "jcas/error.hpp"
#include "jcas/pipeline.hpp"
#include "jcas/rng.hpp"
#include "jcas/trainer.hpp"

namespace jcas {

struct CalibrationOutcome {
    std::size_t window_len = 0;
    double t_off = 0.0;
    double validated_pf = 0.0; // false-alarm rate on a fresh draw
    std::size_t n_scenes = 0;  // calibration sample size
    bool quantile_undersampled = false;
    bool degenerate_constant = false;
    bool validation_ok = true;
};

struct CalibrationReport {
    CalibrationTable table;
    std::vector<CalibrationOutcome> outcomes;
    std::vector<std::string> warnings;
};

namespace detail {

// Target-absent logit sample at a fixed window length; noise levels are drawn
// from the training ranges so the offset covers the whole operating regime.
inline std::vector<double> h0_logits(const NetworkSet& nets, const ScenarioParams& sc,
                                     const SceneSampling& ss, std::size_t window_len,
                                     std::size_t n_scenes, SeededRng& rng) {
    std::vector<double> logits;
    logits.reserve(n_scenes);
    BatchOptions opt;
    opt.comm_active = false;
    opt.angle_active = false;
    constexpr std::size_t chunk = 2048;
    std::vector<SceneDraw> scenes;
    while (logits.size() < n_scenes) {
        const std::size_t want = std::min(chunk, n_scenes - logits.size());
        scenes.clear();
        for (std::size_t i = 0; i < want; ++i) {
            const double snr_c = rng.uniform(ss.comm_snr_db_lo, ss.comm_snr_db_hi);
            const double snr_s = rng.uniform(ss.sense_snr_db_lo, ss.sense_snr_db_hi);
            SceneDraw d = draw_scene(sc, window_len,
                                     sc.comm_fading_power * std::pow(10.0, -snr_c / 10.0),
                                     sc.reflect_power * std::pow(10.0, -snr_s / 10.0), rng);
            d.scene.target_present = false;
            scenes.push_back(std::move(d));
        }
        const BatchForward fwd = forward_batch(nets, sc, scenes, opt);
        logits.insert(logits.end(), fwd.det_logits.begin(), fwd.det_logits.end());
    }
    return logits;
}

} // namespace detail

// NN detection decision, shared by calibration validation and evaluation.
inline bool nn_detects(double logit, double t_off) { return logit + t_off > 0.0; }

inline CalibrationReport calibrate_thresholds(const NetworkSet& nets, const ScenarioParams& sc,
                                              const SceneSampling& ss, double false_alarm_target,
                                              std::size_t window_lo, std::size_t window_hi,
                                              std::size_t scenes_per_window, std::uint64_t seed) {
    sc.validate();
    ss.validate();
    if (!(false_alarm_target > 0.0 && false_alarm_target < 1.0))
        throw DomainError("calibrate_thresholds: false-alarm target outside (0,1)");
    if (window_lo < 1 || window_lo > window_hi)
        throw DomainError("calibrate_thresholds: bad window range");
    if (scenes_per_window < 2) throw DomainError("calibrate_thresholds: need at least two scenes");

    CalibrationReport rep;
    rep.table.false_alarm_target = false_alarm_target;
    SeededRng base(seed, rng_stream::calibrate);

    for (std::size_t w = window_lo; w <= window_hi; ++w) {
        CalibrationOutcome out;
        out.window_len = w;
        out.n_scenes = scenes_per_window;

        SeededRng fit_rng = base.substream(2 * w);
        std::vector<double> logits =
            detail::h0_logits(nets, sc, ss, w, scenes_per_window, fit_rng);
        std::sort(logits.begin(), logits.end());
        const std::size_t n = logits.size();

        if (static_cast<double>(n) * false_alarm_target < 10.0) {
            out.quantile_undersampled = true;
            rep.warnings.push_back("window " + std::to_string(w) + ": only " + std::to_string(n) +
                                   " scenes for a " + std::to_string(false_alarm_target) +
                                   " false-alarm quantile");
        }

        // Higher of the two order statistics bracketing the (1-p_f) point,
        // so the in-sample false-alarm rate errs low.
        const double pos = (1.0 - false_alarm_target) * static_cast<double>(n);
        const std::size_t idx = std::min(n - 1, static_cast<std::size_t>(pos));
        out.t_off = -logits[idx];

        if (logits.front() == logits.back()) {
            out.degenerate_constant = true;
            rep.warnings.push_back("window " + std::to_string(w) +
                                   ": constant detector logits; false-alarm rate pinned to 0");
        }

        // Fresh validation draw.
        SeededRng val_rng = base.substream(2 * w + 1);
        const std::vector<double> fresh =
            detail::h0_logits(nets, sc, ss, w, scenes_per_window, val_rng);
        std::size_t alarms = 0;
        for (double l : fresh) alarms += nn_detects(l, out.t_off) ? 1 : 0;
        out.validated_pf = static_cast<double>(alarms) / static_cast<double>(fresh.size());
        const double sigma = std::sqrt(false_alarm_target * (1.0 - false_alarm_target) /
                                       static_cast<double>(fresh.size()));
        out.validation_ok = out.degenerate_constant
                                ? (out.validated_pf == 0.0)
                                : std::abs(out.validated_pf - false_alarm_target) <= 3.0 * sigma;
        if (!out.validation_ok)
            rep.warnings.push_back("window " + std::to_string(w) + ": validated false-alarm rate " +
                                   std::to_string(out.validated_pf) + " outside 3 sigma of " +
                                   std::to_string(false_alarm_target));

        rep.table.offsets[w] = out.t_off;
        rep.outcomes.push_back(out);
    }
    return rep;
}

} // namespace jcas
