// System-level orchestration: a config plus the four networks, the training
// lifecycle (init -> pretrained -> finetuned -> calibrated), and checkpoint
// persistence.  The per-purpose rng streams keyed off one seed make every
// stage reproducible independently, so a run resumed from a checkpoint
// continues exactly like an uninterrupted one.
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "jcas/calibrate.hpp"
#include "jcas/checkpoint.hpp"
#include "jcas/config.hpp"
#include "jcas/pipeline.hpp"
#include "jcas/trainer.hpp"

namespace jcas {

struct JcasSystem {
    ExperimentConfig cfg;
    ScenarioParams scenario;
    NetworkSet nets;
    std::optional<CalibrationTable> calibration;
    std::string phase = "init";
};

inline JcasSystem make_system(const ExperimentConfig& cfg) {
    cfg.validate();
    JcasSystem sys;
    sys.cfg = cfg;
    sys.scenario = scenario_from(cfg);
    SeededRng rng(cfg.seed, rng_stream::init);
    sys.nets = NetworkSet::build(cfg.n_antennas, cfg.order, rng);
    return sys;
}

inline TrainStats train_system(JcasSystem& sys, std::ostream* log = nullptr) {
    const TrainSchedule sch = schedule_from(sys.cfg);
    TrainStats stats = pretrain(sys.nets, sys.scenario, sch, sys.cfg.w_s, sys.cfg.seed, log);
    sys.phase = "pretrained";
    const TrainStats fin = finetune(sys.nets, sys.scenario, sch, sys.cfg.w_s, sys.cfg.seed, log);
    stats.steps += fin.steps;
    stats.empty_angle_batches += fin.empty_angle_batches;
    stats.history.insert(stats.history.end(), fin.history.begin(), fin.history.end());
    sys.phase = "finetuned";
    return stats;
}

inline CalibrationReport calibrate_system(JcasSystem& sys) {
    const TrainSchedule sch = schedule_from(sys.cfg);
    CalibrationReport rep =
        calibrate_thresholds(sys.nets, sys.scenario, sch.sampling, sys.cfg.false_alarm,
                             sys.cfg.window_min, sys.cfg.window_max, sys.cfg.calib_scenes,
                             sys.cfg.seed);
    sys.calibration = rep.table;
    sys.phase = "calibrated";
    return rep;
}

inline SystemCheckpoint to_checkpoint(const JcasSystem& sys) {
    SystemCheckpoint c;
    c.n_antennas = sys.cfg.n_antennas;
    c.order = sys.cfg.order;
    c.seed = sys.cfg.seed;
    c.phase = sys.phase;
    c.sensing_weight = sys.cfg.w_s;
    c.beamformer = {ComponentKind::beamformer, sys.nets.beam_spec, sys.nets.beam, sys.cfg.seed,
                    sys.phase};
    c.decoder = {ComponentKind::decoder, sys.nets.dec_spec, sys.nets.dec, sys.cfg.seed, sys.phase};
    c.angle = {ComponentKind::angle, sys.nets.ang_spec, sys.nets.ang, sys.cfg.seed, sys.phase};
    c.detection = {ComponentKind::detection, sys.nets.det_spec, sys.nets.det, sys.cfg.seed,
                   sys.phase};
    c.calibration = sys.calibration;
    return c;
}

// Rebuild a system from a checkpoint under `cfg`.  The architecture is
// derived from the config, so a checkpoint trained under different system
// dimensions is rejected rather than silently reinterpreted.
inline JcasSystem from_checkpoint(const ExperimentConfig& cfg, const SystemCheckpoint& c) {
    if (c.n_antennas != cfg.n_antennas || c.order != cfg.order)
        throw ConfigError("checkpoint: system dimensions (K=" + std::to_string(c.n_antennas) +
                          ", M=" + std::to_string(c.order) + ") do not match the config (K=" +
                          std::to_string(cfg.n_antennas) + ", M=" + std::to_string(cfg.order) +
                          ")");
    JcasSystem sys = make_system(cfg);
    const auto adopt = [](const ComponentCheckpoint& comp, const MlpSpec& want, MlpParams& dst,
                          const char* name) {
        if (comp.spec.widths != want.widths)
            throw ConfigError(std::string("checkpoint: ") + name +
                              " architecture does not match the config");
        dst = comp.params;
    };
    adopt(c.beamformer, sys.nets.beam_spec, sys.nets.beam, "beamformer");
    adopt(c.decoder, sys.nets.dec_spec, sys.nets.dec, "decoder");
    adopt(c.angle, sys.nets.ang_spec, sys.nets.ang, "angle");
    adopt(c.detection, sys.nets.det_spec, sys.nets.det, "detection");
    sys.calibration = c.calibration;
    sys.phase = c.phase;
    return sys;
}

inline void save_system_checkpoint(const JcasSystem& sys, const std::string& path) {
    save_system_file(path, to_checkpoint(sys));
}

inline JcasSystem load_system_checkpoint(const ExperimentConfig& cfg, const std::string& path) {
    return from_checkpoint(cfg, load_system_file(path));
}

} // namespace jcas
