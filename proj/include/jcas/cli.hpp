// Command-line front end.  Subcommands cover the full experiment lifecycle:
// train, calibrate, eval-comm, eval-sensing, beampattern, baseline, and a
// figure-reproducing sweep over the trade-off weight.  Every output file is
// stamped with the config hash and seed, and identical invocations write
// byte-identical results.  Exit codes: 0 success, 2 configuration problem,
// 3 numerical failure.
#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "jcas/config.hpp"
#include "jcas/evaluate.hpp"
#include "jcas/metrics.hpp"
#include "jcas/system.hpp"

namespace jcas {

namespace detail {

struct CliArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::string checkpoint;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> profile;
};

inline void add_common_options(CLI::App* sub, CliArgs& a, bool with_checkpoint) {
    sub->add_option("--config", a.config_path, "experiment config file (defaults when omitted)");
    sub->add_option("--out", a.out_dir, "output directory");
    sub->add_option("--seed", a.seed, "seed override");
    sub->add_option("--profile", a.profile, "schedule profile override (desk|paper)");
    if (with_checkpoint)
        sub->add_option("--checkpoint", a.checkpoint, "system checkpoint to load");
}

inline ExperimentConfig resolve_config(const CliArgs& a) {
    ExperimentConfig cfg =
        a.config_path.empty() ? ExperimentConfig{} : load_config_file(a.config_path);
    if (a.seed) cfg.seed = *a.seed;
    if (a.profile) cfg.profile = *a.profile;
    cfg.validate();
    return cfg;
}

inline std::vector<std::string> run_stamps(const ExperimentConfig& cfg, const std::string& cmd) {
    return {"command=" + cmd, "config_hash=" + config_hash(cfg),
            "seed=" + std::to_string(cfg.seed)};
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + path.string());
    os << content;
}

inline JcasSystem load_for(const CliArgs& a, const ExperimentConfig& cfg) {
    if (a.checkpoint.empty())
        throw ConfigError("this subcommand requires --checkpoint <path>");
    return load_system_checkpoint(cfg, a.checkpoint);
}

inline void print_warnings(const CalibrationReport& rep) {
    for (const std::string& w : rep.warnings) std::cerr << "warning: " << w << '\n';
}

inline std::vector<MetricRow> calibration_rows(const CalibrationReport& rep, double w_s) {
    std::vector<MetricRow> rows;
    for (const CalibrationOutcome& o : rep.outcomes) {
        const double se =
            std::sqrt(std::max(0.0, o.validated_pf * (1.0 - o.validated_pf)) /
                      static_cast<double>(o.n_scenes));
        rows.push_back(make_row(std::nullopt, std::nullopt, o.window_len, w_s, "pf_calib",
                                o.validated_pf, o.n_scenes, se));
    }
    return rows;
}

inline std::vector<MetricRow> beampattern_rows(const BeampatternResult& r, double w_s,
                                               std::size_t grid) {
    return {make_row(std::nullopt, std::nullopt, std::nullopt, w_s, "frac_sense", r.frac_sense,
                     grid, 0.0),
            make_row(std::nullopt, std::nullopt, std::nullopt, w_s, "frac_comm", r.frac_comm,
                     grid, 0.0),
            make_row(std::nullopt, std::nullopt, std::nullopt, w_s, "frac_outside",
                     r.frac_outside, grid, 0.0)};
}

inline int cmd_train(const CliArgs& a) {
    const ExperimentConfig cfg = resolve_config(a);
    std::filesystem::create_directories(a.out_dir);
    JcasSystem sys = make_system(cfg);
    std::ofstream log(std::filesystem::path(a.out_dir) / "train.log",
                      std::ios::binary | std::ios::trunc);
    if (!log) throw ConfigError("cannot write train.log in " + a.out_dir);
    for (const std::string& s : run_stamps(cfg, "train")) log << "# " << s << '\n';
    train_system(sys, &log);
    save_system_checkpoint(sys, (std::filesystem::path(a.out_dir) / "system.ckpt").string());
    return 0;
}

inline int cmd_calibrate(const CliArgs& a) {
    const ExperimentConfig cfg = resolve_config(a);
    std::filesystem::create_directories(a.out_dir);
    JcasSystem sys = load_for(a, cfg);
    const CalibrationReport rep = calibrate_system(sys);
    print_warnings(rep);
    save_system_checkpoint(sys, (std::filesystem::path(a.out_dir) / "system.ckpt").string());
    const auto rows = calibration_rows(rep, sys.cfg.w_s);
    write_text_file(std::filesystem::path(a.out_dir) / "metrics.csv",
                    emit_metrics_csv(rows, run_stamps(cfg, "calibrate")));
    return 0;
}

inline int cmd_eval_comm(const CliArgs& a) {
    const ExperimentConfig cfg = resolve_config(a);
    std::filesystem::create_directories(a.out_dir);
    const JcasSystem sys = load_for(a, cfg);
    const auto rows = eval_comm(sys.nets, sys.scenario, cfg.comm_snr_db, cfg.comm_symbols,
                                cfg.seed, sys.cfg.w_s);
    write_text_file(std::filesystem::path(a.out_dir) / "metrics.csv",
                    emit_metrics_csv(rows, run_stamps(cfg, "eval-comm")));
    return 0;
}

inline int cmd_eval_sensing(const CliArgs& a) {
    const ExperimentConfig cfg = resolve_config(a);
    std::filesystem::create_directories(a.out_dir);
    const JcasSystem sys = load_for(a, cfg);
    if (!sys.calibration)
        throw ConfigError("eval-sensing requires a calibrated checkpoint; run calibrate first");
    const auto rows =
        eval_sensing(sys.nets, sys.scenario, *sys.calibration, cfg.false_alarm, cfg.sense_snr_db,
                     cfg.eval_n_win, cfg.sense_scenes, cfg.seed, sys.cfg.w_s);
    write_text_file(std::filesystem::path(a.out_dir) / "metrics.csv",
                    emit_metrics_csv(rows, run_stamps(cfg, "eval-sensing")));
    return 0;
}

inline int cmd_beampattern(const CliArgs& a) {
    const ExperimentConfig cfg = resolve_config(a);
    std::filesystem::create_directories(a.out_dir);
    const JcasSystem sys = load_for(a, cfg);
    const BeamWeights v = compute_beam(sys.nets.beam_spec, sys.nets.beam, sys.scenario);
    const BeampatternResult r =
        eval_beampattern(v, sys.scenario.sense_region, sys.scenario.comm_region, cfg.beam_grid);
    const auto stamps = run_stamps(cfg, "beampattern");
    write_text_file(std::filesystem::path(a.out_dir) / "beampattern.csv",
                    emit_beampattern_csv(r, stamps));
    write_text_file(std::filesystem::path(a.out_dir) / "metrics.csv",
                    emit_metrics_csv(beampattern_rows(r, sys.cfg.w_s, cfg.beam_grid), stamps));
    return 0;
}

inline int cmd_baseline(const CliArgs& a) {
    const ExperimentConfig cfg = resolve_config(a);
    std::filesystem::create_directories(a.out_dir);
    const auto rows = eval_baseline(scenario_from(cfg), cfg.false_alarm, cfg.sense_snr_db,
                                    cfg.eval_n_win, cfg.sense_scenes, cfg.seed);
    write_text_file(std::filesystem::path(a.out_dir) / "metrics.csv",
                    emit_metrics_csv(rows, run_stamps(cfg, "baseline")));
    return 0;
}

// One full trained+calibrated+evaluated system per trade-off weight; all
// rows land in one metrics.csv keyed by the w_s coordinate.
inline int cmd_sweep(const CliArgs& a) {
    const ExperimentConfig base = resolve_config(a);
    std::filesystem::create_directories(a.out_dir);
    std::ofstream log(std::filesystem::path(a.out_dir) / "train.log",
                      std::ios::binary | std::ios::trunc);
    if (!log) throw ConfigError("cannot write train.log in " + a.out_dir);
    const auto stamps = run_stamps(base, "sweep");
    for (const std::string& s : stamps) log << "# " << s << '\n';

    std::vector<MetricRow> all;
    for (std::size_t i = 0; i < base.w_s_grid.size(); ++i) {
        ExperimentConfig cfg = base;
        cfg.w_s = base.w_s_grid[i];
        log << "# sweep point w_s=" << detail::fmt_double(cfg.w_s) << '\n';
        JcasSystem sys = make_system(cfg);
        train_system(sys, &log);
        const CalibrationReport rep = calibrate_system(sys);
        print_warnings(rep);
        save_system_checkpoint(
            sys, (std::filesystem::path(a.out_dir) / ("system_ws" + std::to_string(i) + ".ckpt"))
                     .string());

        auto cal = calibration_rows(rep, cfg.w_s);
        all.insert(all.end(), cal.begin(), cal.end());
        auto comm = eval_comm(sys.nets, sys.scenario, cfg.comm_snr_db, cfg.comm_symbols, cfg.seed,
                              cfg.w_s);
        all.insert(all.end(), comm.begin(), comm.end());
        auto sens = eval_sensing(sys.nets, sys.scenario, *sys.calibration, cfg.false_alarm,
                                 cfg.sense_snr_db, cfg.eval_n_win, cfg.sense_scenes, cfg.seed,
                                 cfg.w_s);
        all.insert(all.end(), sens.begin(), sens.end());
        const BeamWeights v = compute_beam(sys.nets.beam_spec, sys.nets.beam, sys.scenario);
        const BeampatternResult r =
            eval_beampattern(v, sys.scenario.sense_region, sys.scenario.comm_region,
                             cfg.beam_grid);
        auto beams = beampattern_rows(r, cfg.w_s, cfg.beam_grid);
        all.insert(all.end(), beams.begin(), beams.end());
    }
    write_text_file(std::filesystem::path(a.out_dir) / "metrics.csv",
                    emit_metrics_csv(all, stamps));
    return 0;
}

} // namespace detail

inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"joint communication and sensing simulation lab"};
    app.require_subcommand(1);

    detail::CliArgs args;
    CLI::App* sub_train = app.add_subcommand("train", "train a system from scratch");
    CLI::App* sub_cal = app.add_subcommand("calibrate", "fit detection thresholds per window");
    CLI::App* sub_comm = app.add_subcommand("eval-comm", "BER/BMI over the comm SNR grid");
    CLI::App* sub_sens = app.add_subcommand("eval-sensing", "detection and AoA metrics");
    CLI::App* sub_beam = app.add_subcommand("beampattern", "gain table and region fractions");
    CLI::App* sub_base = app.add_subcommand("baseline", "classical chain only (no networks)");
    CLI::App* sub_sweep = app.add_subcommand("sweep", "train+eval across the trade-off grid");
    detail::add_common_options(sub_train, args, false);
    detail::add_common_options(sub_cal, args, true);
    detail::add_common_options(sub_comm, args, true);
    detail::add_common_options(sub_sens, args, true);
    detail::add_common_options(sub_beam, args, true);
    detail::add_common_options(sub_base, args, false);
    detail::add_common_options(sub_sweep, args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(sub_train)) return detail::cmd_train(args);
        if (app.got_subcommand(sub_cal)) return detail::cmd_calibrate(args);
        if (app.got_subcommand(sub_comm)) return detail::cmd_eval_comm(args);
        if (app.got_subcommand(sub_sens)) return detail::cmd_eval_sensing(args);
        if (app.got_subcommand(sub_beam)) return detail::cmd_beampattern(args);
        if (app.got_subcommand(sub_base)) return detail::cmd_baseline(args);
        if (app.got_subcommand(sub_sweep)) return detail::cmd_sweep(args);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return 3;
    }
}

inline int run_cli(const std::vector<std::string>& args) {
    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.push_back("jcaslab");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const std::string& s : full) argv.push_back(s.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace jcas
