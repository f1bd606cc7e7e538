// Three-phase optimization: two pre-training passes that zero one sensing
// loss term each, then joint fine-tuning on the full objective.  Every phase
// runs a fixed number of optimizer steps (symbols / batch, computed up
// front), draws scene batches with randomized window length and noise
// levels, and aborts with diagnostics if the loss leaves the finite range.
#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "jcas/adam.hpp"
#include "jcas/error.hpp"
#include "jcas/loss.hpp"
#include "jcas/pipeline.hpp"
#include "jcas/rng.hpp"

namespace jcas {

struct TrainSchedule {
    std::size_t pretrain_symbols = 25'000'000; // per pre-training phase
    std::size_t finetune_symbols = 50'000'000;
    std::size_t batch_symbols = 10'000;
    double learning_rate = 1e-4;
    SceneSampling sampling;

    void validate() const {
        if (pretrain_symbols < 1 || finetune_symbols < 1 || batch_symbols < 1)
            throw DomainError("TrainSchedule: symbol counts must be >= 1");
        if (!(learning_rate >= 0.0)) throw DomainError("TrainSchedule: negative learning rate");
        sampling.validate();
    }
};

enum class TrainPhase {
    pretrain_no_detect, // detection term zeroed
    pretrain_no_angle,  // angle term zeroed
    finetune,
};

inline const char* phase_name(TrainPhase p) {
    switch (p) {
        case TrainPhase::pretrain_no_detect: return "pretrain1";
        case TrainPhase::pretrain_no_angle: return "pretrain2";
        case TrainPhase::finetune: return "finetune";
    }
    return "?";
}

// Deterministic per-purpose RNG streams, so fine-tuning a loaded pre-trained
// checkpoint replays exactly the trajectory of an uninterrupted run.
namespace rng_stream {
inline constexpr std::uint64_t init = 10;
inline constexpr std::uint64_t pretrain1 = 11;
inline constexpr std::uint64_t pretrain2 = 12;
inline constexpr std::uint64_t finetune = 13;
inline constexpr std::uint64_t calibrate = 14;
inline constexpr std::uint64_t eval_comm = 20;
inline constexpr std::uint64_t eval_sense = 21;
inline constexpr std::uint64_t eval_baseline = 22;
} // namespace rng_stream

struct TrainStats {
    std::size_t steps = 0;
    std::size_t empty_angle_batches = 0; // batches where no scene had a target
    std::vector<LossBreakdown> history;  // one entry per optimizer step
};

namespace detail {

inline void run_phase(NetworkSet& nets, const ScenarioParams& sc, const TrainSchedule& sch,
                      double w_s, TrainPhase phase, std::size_t phase_symbols, SeededRng& rng,
                      std::ostream* log, std::uint64_t seed, TrainStats& stats) {
    // Step count is fixed up front; the final partial batch is not trained.
    const std::size_t n_steps = phase_symbols / sch.batch_symbols;

    BatchOptions opt;
    opt.w_s = w_s;
    opt.detect_active = phase != TrainPhase::pretrain_no_detect;
    opt.angle_active = phase != TrainPhase::pretrain_no_angle;
    opt.with_caches = true;

    AdamConfig acfg;
    acfg.lr = sch.learning_rate;
    AdamState st_beam = AdamState::init(nets.beam, acfg);
    AdamState st_dec = AdamState::init(nets.dec, acfg);
    AdamState st_det = AdamState::init(nets.det, acfg);
    AdamState st_ang = AdamState::init(nets.ang, acfg);

    for (std::size_t step = 1; step <= n_steps; ++step) {
        LossBreakdown lb;
        bool angle_empty = false;
        try {
            const std::vector<SceneDraw> scenes =
                draw_batch(sc, sch.sampling, sch.batch_symbols, rng);
            const BatchForward fwd = forward_batch(nets, sc, scenes, opt);
            LossSeeds seeds;
            lb = compute_losses(fwd, opt, &angle_empty, &seeds);
            if (!std::isfinite(lb.total))
                throw NumericalError("non-finite loss (comm=" + std::to_string(lb.comm) +
                                     " detect=" + std::to_string(lb.detect) +
                                     " angle=" + std::to_string(lb.angle) + ")");
            const ComponentGrads grads = backward_batch(nets, sc, fwd, opt, seeds);
            adam_step(st_beam, nets.beam, grads.beam, "beamformer");
            adam_step(st_dec, nets.dec, grads.dec, "decoder");
            if (opt.detect_active) adam_step(st_det, nets.det, grads.det, "detection");
            if (opt.angle_active) adam_step(st_ang, nets.ang, grads.ang, "angle");
        } catch (const Error& e) {
            throw TrainingError("training diverged in " + std::string(phase_name(phase)) +
                                " at step " + std::to_string(step) + ": " + e.what());
        }

        stats.steps += 1;
        stats.empty_angle_batches += (opt.angle_active && angle_empty) ? 1 : 0;
        stats.history.push_back(lb);
        if (log) {
            char line[256];
            std::snprintf(line, sizeof line,
                          "step=%zu phase=%s comm=%.9g detect=%.9g angle=%.9g total=%.9g "
                          "w_s=%.9g seed=%llu",
                          step, phase_name(phase), lb.comm, lb.detect, lb.angle, lb.total, w_s,
                          static_cast<unsigned long long>(seed));
            *log << line << '\n';
        }
    }
}

} // namespace detail

// Phase 1 trains with the detection term zeroed, phase 2 with the angle term
// zeroed; each consumes `pretrain_symbols`.  Optimizer state is fresh per
// phase.
inline TrainStats pretrain(NetworkSet& nets, const ScenarioParams& sc, const TrainSchedule& sch,
                           double w_s, std::uint64_t seed, std::ostream* log = nullptr) {
    sch.validate();
    sc.validate();
    TradeoffConfig{w_s}.validate();
    TrainStats stats;
    SeededRng r1(seed, rng_stream::pretrain1);
    detail::run_phase(nets, sc, sch, w_s, TrainPhase::pretrain_no_detect, sch.pretrain_symbols,
                      r1, log, seed, stats);
    SeededRng r2(seed, rng_stream::pretrain2);
    detail::run_phase(nets, sc, sch, w_s, TrainPhase::pretrain_no_angle, sch.pretrain_symbols, r2,
                      log, seed, stats);
    return stats;
}

// Joint training on the full weighted objective, starting from pre-trained
// parameters.
inline TrainStats finetune(NetworkSet& nets, const ScenarioParams& sc, const TrainSchedule& sch,
                           double w_s, std::uint64_t seed, std::ostream* log = nullptr) {
    sch.validate();
    sc.validate();
    TradeoffConfig{w_s}.validate();
    TrainStats stats;
    SeededRng r(seed, rng_stream::finetune);
    detail::run_phase(nets, sc, sch, w_s, TrainPhase::finetune, sch.finetune_symbols, r, log,
                      seed, stats);
    return stats;
}

} // namespace jcas
