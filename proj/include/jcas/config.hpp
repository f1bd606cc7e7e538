// Experiment configuration: a flat sectioned key-value text format with a
// canonical serialization used for run stamping.  Unknown sections or keys
// are hard errors so that a typo cannot silently fall back to a default in
// the middle of a sweep.
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "jcas/beam.hpp"
#include "jcas/error.hpp"
#include "jcas/pipeline.hpp"
#include "jcas/trainer.hpp"

namespace jcas {

struct ExperimentConfig {
    // [system]
    std::size_t n_antennas = 16;
    std::size_t order = 16;
    std::size_t window_min = 1;
    std::size_t window_max = 15;

    // [regions], degrees in the file, converted on use
    double comm_lo_deg = 30.0, comm_hi_deg = 50.0;
    double sense_lo_deg = -20.0, sense_hi_deg = 20.0;

    // [training]
    std::string profile = "desk"; // desk | paper
    double w_s = 0.5;
    std::uint64_t seed = 1;
    double learning_rate = 1e-4;
    std::size_t batch_symbols = 10'000;
    std::size_t pretrain_symbols = 0; // 0 = profile default
    std::size_t finetune_symbols = 0; // 0 = profile default
    double train_comm_snr_lo_db = 0.0, train_comm_snr_hi_db = 25.0;
    double train_sense_snr_lo_db = -10.0, train_sense_snr_hi_db = 10.0;

    // [calibration]
    double false_alarm = 1e-2;
    std::size_t calib_scenes = 10'000; // H0 scenes per window length

    // [eval]
    std::vector<double> comm_snr_db{0, 5, 10, 15, 20, 25};
    std::vector<double> sense_snr_db{-10, -5, 0, 5, 10};
    std::vector<std::size_t> eval_n_win{1, 5, 15};
    std::vector<double> w_s_grid{0.1, 0.3, 0.5, 0.7, 0.9};
    std::size_t comm_symbols = 100'000;  // symbols per comm grid point
    std::size_t sense_scenes = 20'000;   // scenes per sensing grid point
    std::size_t beam_grid = 721;         // nodes over the full field of view

    void validate() const {
        if (n_antennas < 2) throw ConfigError("config: n_antennas must be >= 2");
        if (window_min < 1 || window_max < window_min)
            throw ConfigError("config: invalid window range");
        if (!(comm_lo_deg < comm_hi_deg) || !(sense_lo_deg < sense_hi_deg))
            throw ConfigError("config: regions must satisfy lo < hi");
        if (profile != "desk" && profile != "paper")
            throw ConfigError("config: profile must be desk or paper");
        if (!(w_s >= 0.0 && w_s <= 1.0)) throw ConfigError("config: w_s must lie in [0,1]");
        if (!(false_alarm > 0.0 && false_alarm < 1.0))
            throw ConfigError("config: false_alarm must lie in (0,1)");
        if (comm_snr_db.empty() || sense_snr_db.empty() || eval_n_win.empty() || w_s_grid.empty())
            throw ConfigError("config: grids must be non-empty");
        for (std::size_t n : eval_n_win)
            if (n < window_min || n > window_max)
                throw ConfigError("config: eval_n_win outside the window range");
        for (double w : w_s_grid)
            if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("config: w_s_grid entry outside [0,1]");
        if (comm_symbols < 1 || sense_scenes < 1 || calib_scenes < 2)
            throw ConfigError("config: sample counts too small");
        if (beam_grid < 2) throw ConfigError("config: beam_grid too small");
        region_from_degrees(comm_lo_deg, comm_hi_deg);
        region_from_degrees(sense_lo_deg, sense_hi_deg);
    }

    AngleRegion comm_region() const { return region_from_degrees(comm_lo_deg, comm_hi_deg); }
    AngleRegion sense_region() const { return region_from_degrees(sense_lo_deg, sense_hi_deg); }

    bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt_double(v[i]);
    }
    return s;
}

inline std::string fmt_list(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

inline double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for " + key + ": '" + s + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for " + key + ": '" + s + "'");
    }
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

} // namespace detail

// Canonical text form: every key in a fixed order, numbers at full precision.
// The config hash is computed over exactly this string.
inline std::string serialize_config(const ExperimentConfig& c) {
    using detail::fmt_double;
    using detail::fmt_list;
    std::ostringstream os;
    os << "[system]\n";
    os << "n_antennas = " << c.n_antennas << '\n';
    os << "order = " << c.order << '\n';
    os << "window_min = " << c.window_min << '\n';
    os << "window_max = " << c.window_max << '\n';
    os << "[regions]\n";
    os << "comm_lo_deg = " << fmt_double(c.comm_lo_deg) << '\n';
    os << "comm_hi_deg = " << fmt_double(c.comm_hi_deg) << '\n';
    os << "sense_lo_deg = " << fmt_double(c.sense_lo_deg) << '\n';
    os << "sense_hi_deg = " << fmt_double(c.sense_hi_deg) << '\n';
    os << "[training]\n";
    os << "profile = " << c.profile << '\n';
    os << "w_s = " << fmt_double(c.w_s) << '\n';
    os << "seed = " << c.seed << '\n';
    os << "learning_rate = " << fmt_double(c.learning_rate) << '\n';
    os << "batch_symbols = " << c.batch_symbols << '\n';
    os << "pretrain_symbols = " << c.pretrain_symbols << '\n';
    os << "finetune_symbols = " << c.finetune_symbols << '\n';
    os << "comm_snr_lo_db = " << fmt_double(c.train_comm_snr_lo_db) << '\n';
    os << "comm_snr_hi_db = " << fmt_double(c.train_comm_snr_hi_db) << '\n';
    os << "sense_snr_lo_db = " << fmt_double(c.train_sense_snr_lo_db) << '\n';
    os << "sense_snr_hi_db = " << fmt_double(c.train_sense_snr_hi_db) << '\n';
    os << "[calibration]\n";
    os << "false_alarm = " << fmt_double(c.false_alarm) << '\n';
    os << "scenes_per_window = " << c.calib_scenes << '\n';
    os << "[eval]\n";
    os << "comm_snr_db = " << fmt_list(c.comm_snr_db) << '\n';
    os << "sense_snr_db = " << fmt_list(c.sense_snr_db) << '\n';
    os << "n_win = " << fmt_list(c.eval_n_win) << '\n';
    os << "w_s_grid = " << fmt_list(c.w_s_grid) << '\n';
    os << "comm_symbols = " << c.comm_symbols << '\n';
    os << "sense_scenes = " << c.sense_scenes << '\n';
    os << "beam_grid = " << c.beam_grid << '\n';
    return os.str();
}

// Parses the sectioned key-value format.  `#` starts a comment, blank lines
// are ignored, repeated keys and unknown section/key pairs are errors.
inline ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig c;
    std::string section;
    std::string line;
    std::map<std::string, bool> seen;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) + ": bad section header");
            section = line.substr(1, line.size() - 2);
            if (section != "system" && section != "regions" && section != "training" &&
                section != "calibration" && section != "eval")
                throw ConfigError("config: unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        const std::string full = section + "." + key;
        if (seen[full]) throw ConfigError("config: duplicate key " + full);
        seen[full] = true;

        using detail::parse_double;
        using detail::parse_u64;
        if (full == "system.n_antennas") c.n_antennas = parse_u64(val, full);
        else if (full == "system.order") c.order = parse_u64(val, full);
        else if (full == "system.window_min") c.window_min = parse_u64(val, full);
        else if (full == "system.window_max") c.window_max = parse_u64(val, full);
        else if (full == "regions.comm_lo_deg") c.comm_lo_deg = parse_double(val, full);
        else if (full == "regions.comm_hi_deg") c.comm_hi_deg = parse_double(val, full);
        else if (full == "regions.sense_lo_deg") c.sense_lo_deg = parse_double(val, full);
        else if (full == "regions.sense_hi_deg") c.sense_hi_deg = parse_double(val, full);
        else if (full == "training.profile") c.profile = val;
        else if (full == "training.w_s") c.w_s = parse_double(val, full);
        else if (full == "training.seed") c.seed = parse_u64(val, full);
        else if (full == "training.learning_rate") c.learning_rate = parse_double(val, full);
        else if (full == "training.batch_symbols") c.batch_symbols = parse_u64(val, full);
        else if (full == "training.pretrain_symbols") c.pretrain_symbols = parse_u64(val, full);
        else if (full == "training.finetune_symbols") c.finetune_symbols = parse_u64(val, full);
        else if (full == "training.comm_snr_lo_db") c.train_comm_snr_lo_db = parse_double(val, full);
        else if (full == "training.comm_snr_hi_db") c.train_comm_snr_hi_db = parse_double(val, full);
        else if (full == "training.sense_snr_lo_db")
            c.train_sense_snr_lo_db = parse_double(val, full);
        else if (full == "training.sense_snr_hi_db")
            c.train_sense_snr_hi_db = parse_double(val, full);
        else if (full == "calibration.false_alarm") c.false_alarm = parse_double(val, full);
        else if (full == "calibration.scenes_per_window") c.calib_scenes = parse_u64(val, full);
        else if (full == "eval.comm_snr_db" || full == "eval.sense_snr_db" ||
                 full == "eval.w_s_grid") {
            std::vector<double> v;
            for (const std::string& item : detail::split_list(val))
                v.push_back(parse_double(detail::trim(item), full));
            if (full == "eval.comm_snr_db") c.comm_snr_db = std::move(v);
            else if (full == "eval.sense_snr_db") c.sense_snr_db = std::move(v);
            else c.w_s_grid = std::move(v);
        } else if (full == "eval.n_win") {
            std::vector<std::size_t> v;
            for (const std::string& item : detail::split_list(val))
                v.push_back(parse_u64(detail::trim(item), full));
            c.eval_n_win = std::move(v);
        } else if (full == "eval.comm_symbols") c.comm_symbols = parse_u64(val, full);
        else if (full == "eval.sense_scenes") c.sense_scenes = parse_u64(val, full);
        else if (full == "eval.beam_grid") c.beam_grid = parse_u64(val, full);
        else throw ConfigError("config: unknown key " + full);
    }
    c.validate();
    return c;
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    return parse_config(is);
}

// FNV-1a over the canonical serialization, reported as fixed-width hex.
inline std::string config_hash(const ExperimentConfig& c) {
    const std::string text = serialize_config(c);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Materialize the library-level parameter blocks from a config.
inline ScenarioParams scenario_from(const ExperimentConfig& c) {
    ScenarioParams sc;
    sc.n_antennas = c.n_antennas;
    sc.constellation = build_qam(c.order);
    sc.comm_region = c.comm_region();
    sc.sense_region = c.sense_region();
    sc.window_max = c.window_max;
    sc.validate();
    return sc;
}

inline TrainSchedule schedule_from(const ExperimentConfig& c) {
    TrainSchedule s;
    const bool desk = c.profile == "desk";
    s.pretrain_symbols = c.pretrain_symbols ? c.pretrain_symbols : (desk ? 1'000'000 : 25'000'000);
    s.finetune_symbols = c.finetune_symbols ? c.finetune_symbols : (desk ? 2'000'000 : 50'000'000);
    s.batch_symbols = c.batch_symbols;
    s.learning_rate = c.learning_rate;
    s.sampling.window_min = c.window_min;
    s.sampling.window_max = c.window_max;
    s.sampling.comm_snr_db_lo = c.train_comm_snr_lo_db;
    s.sampling.comm_snr_db_hi = c.train_comm_snr_hi_db;
    s.sampling.sense_snr_db_lo = c.train_sense_snr_lo_db;
    s.sampling.sense_snr_db_hi = c.train_sense_snr_hi_db;
    s.validate();
    return s;
}

} // namespace jcas
