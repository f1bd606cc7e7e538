// Checkpoint container: a text header describing the component (kind, layer
// widths, head, seed, training phase) followed by the parameter arrays as
// little-endian IEEE-754 doubles, per layer weights row-major then bias.
// A system file stacks one header plus four component records and the
// calibration table.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "jcas/calibration.hpp"
#include "jcas/components.hpp"
#include "jcas/error.hpp"
#include "jcas/mlp.hpp"

namespace jcas {

namespace detail {

inline void write_f64_le(std::ostream& os, std::span<const double> vals) {
    static_assert(sizeof(double) == 8);
    for (const double v : vals) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        if constexpr (std::endian::native == std::endian::big) {
            std::uint64_t r = 0;
            for (int i = 0; i < 8; ++i) r = (r << 8) | ((bits >> (8 * i)) & 0xFFu);
            bits = r;
        }
        char buf[8];
        std::memcpy(buf, &bits, 8);
        os.write(buf, 8);
    }
}

inline std::vector<double> read_f64_le(std::istream& is, std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        char buf[8];
        if (!is.read(buf, 8)) throw ConfigError("checkpoint: truncated parameter blob");
        std::uint64_t bits;
        std::memcpy(&bits, buf, 8);
        if constexpr (std::endian::native == std::endian::big) {
            std::uint64_t r = 0;
            for (int ii = 0; ii < 8; ++ii) r = (r << 8) | ((bits >> (8 * ii)) & 0xFFu);
            bits = r;
        }
        std::memcpy(&out[i], &bits, 8);
    }
    return out;
}

inline const char* head_name(Head h) {
    switch (h) {
        case Head::linear: return "linear";
        case Head::sigmoid_offset: return "sigmoid_offset";
        case Head::scaled_tanh: return "scaled_tanh";
        case Head::beam_normalized: return "beam_normalized";
    }
    return "?";
}

inline Head parse_head(const std::string& s) {
    if (s == "linear") return Head::linear;
    if (s == "sigmoid_offset") return Head::sigmoid_offset;
    if (s == "scaled_tanh") return Head::scaled_tanh;
    if (s == "beam_normalized") return Head::beam_normalized;
    throw ConfigError("checkpoint: unknown head '" + s + "'");
}

inline ComponentKind parse_component(const std::string& s) {
    if (s == "beamformer") return ComponentKind::beamformer;
    if (s == "decoder") return ComponentKind::decoder;
    if (s == "angle") return ComponentKind::angle;
    if (s == "detection") return ComponentKind::detection;
    throw ConfigError("checkpoint: unknown component '" + s + "'");
}

// Reads one header line "key rest..." and verifies the key.
inline std::istringstream expect_line(std::istream& is, const std::string& key) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("checkpoint: missing '" + key + "' line");
    std::istringstream ss(line);
    std::string got;
    ss >> got;
    if (got != key) throw ConfigError("checkpoint: expected '" + key + "', found '" + got + "'");
    return ss;
}

} // namespace detail

struct ComponentCheckpoint {
    ComponentKind kind = ComponentKind::beamformer;
    MlpSpec spec;
    MlpParams params;
    std::uint64_t seed = 0;
    std::string phase = "init";
};

inline void save_component(std::ostream& os, const ComponentCheckpoint& c) {
    c.params.validate_shapes(c.spec);
    os << "jcas-checkpoint v1\n";
    os << "component " << component_name(c.kind) << '\n';
    os << "head " << detail::head_name(c.spec.head) << '\n';
    os << "widths " << c.spec.widths.size();
    for (std::size_t w : c.spec.widths) os << ' ' << w;
    os << '\n';
    os << "seed " << c.seed << '\n';
    os << "phase " << c.phase << '\n';
    const auto flat = flatten_params(c.params);
    os << "params " << flat.size() << '\n';
    detail::write_f64_le(os, flat);
    if (!os) throw ConfigError("checkpoint: write failed");
}

inline ComponentCheckpoint load_component(std::istream& is) {
    ComponentCheckpoint c;
    {
        std::string line;
        if (!std::getline(is, line) || line != "jcas-checkpoint v1")
            throw ConfigError("checkpoint: bad magic line");
    }
    {
        auto ss = detail::expect_line(is, "component");
        std::string name;
        ss >> name;
        c.kind = detail::parse_component(name);
    }
    {
        auto ss = detail::expect_line(is, "head");
        std::string name;
        ss >> name;
        c.spec.head = detail::parse_head(name);
    }
    {
        auto ss = detail::expect_line(is, "widths");
        std::size_t n = 0;
        ss >> n;
        c.spec.widths.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            if (!(ss >> c.spec.widths[i])) throw ConfigError("checkpoint: bad widths line");
    }
    {
        auto ss = detail::expect_line(is, "seed");
        ss >> c.seed;
    }
    {
        auto ss = detail::expect_line(is, "phase");
        ss >> c.phase;
    }
    std::size_t count = 0;
    {
        auto ss = detail::expect_line(is, "params");
        ss >> count;
    }
    c.spec.validate();
    c.params.layers.resize(c.spec.n_layers());
    for (std::size_t l = 0; l < c.spec.n_layers(); ++l) {
        c.params.layers[l].w = RealMatrix(c.spec.widths[l + 1], c.spec.widths[l]);
        c.params.layers[l].b.assign(c.spec.widths[l + 1], 0.0);
    }
    if (count != c.params.count()) throw ConfigError("checkpoint: parameter count mismatch");
    unflatten_params(detail::read_f64_le(is, count), c.params);
    return c;
}

// Full system: the four components plus scenario metadata and (optionally)
// the calibrated thresholds.
struct SystemCheckpoint {
    std::size_t n_antennas = 0;
    std::size_t order = 0;
    std::uint64_t seed = 0;
    std::string phase = "init";
    double sensing_weight = 0.5;
    ComponentCheckpoint beamformer, decoder, angle, detection;
    std::optional<CalibrationTable> calibration;
};

inline void save_system(std::ostream& os, const SystemCheckpoint& s) {
    os << "jcas-system v1\n";
    os << "antennas " << s.n_antennas << '\n';
    os << "order " << s.order << '\n';
    os << "seed " << s.seed << '\n';
    os << "phase " << s.phase << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", s.sensing_weight);
    os << "sensing_weight " << buf << '\n';
    if (s.calibration) {
        os << "calibration " << s.calibration->offsets.size();
        std::snprintf(buf, sizeof buf, "%.17g", s.calibration->false_alarm_target);
        os << ' ' << buf << '\n';
        for (const auto& [nwin, toff] : s.calibration->offsets) {
            std::snprintf(buf, sizeof buf, "%.17g", toff);
            os << nwin << ' ' << buf << '\n';
        }
    } else {
        os << "calibration 0 0\n";
    }
    save_component(os, s.beamformer);
    save_component(os, s.decoder);
    save_component(os, s.angle);
    save_component(os, s.detection);
}

inline SystemCheckpoint load_system(std::istream& is) {
    SystemCheckpoint s;
    {
        std::string line;
        if (!std::getline(is, line) || line != "jcas-system v1")
            throw ConfigError("checkpoint: bad system magic line");
    }
    detail::expect_line(is, "antennas") >> s.n_antennas;
    detail::expect_line(is, "order") >> s.order;
    detail::expect_line(is, "seed") >> s.seed;
    detail::expect_line(is, "phase") >> s.phase;
    detail::expect_line(is, "sensing_weight") >> s.sensing_weight;
    {
        auto ss = detail::expect_line(is, "calibration");
        std::size_t n = 0;
        double pf = 0.0;
        ss >> n >> pf;
        if (n > 0) {
            CalibrationTable t;
            t.false_alarm_target = pf;
            for (std::size_t i = 0; i < n; ++i) {
                std::string line;
                if (!std::getline(is, line)) throw ConfigError("checkpoint: truncated calibration");
                std::istringstream row(line);
                std::size_t nwin = 0;
                double toff = 0.0;
                if (!(row >> nwin >> toff))
                    throw ConfigError("checkpoint: bad calibration row '" + line + "'");
                t.offsets[nwin] = toff;
            }
            s.calibration = std::move(t);
        }
    }
    s.beamformer = load_component(is);
    s.decoder = load_component(is);
    s.angle = load_component(is);
    s.detection = load_component(is);
    if (s.beamformer.kind != ComponentKind::beamformer || s.decoder.kind != ComponentKind::decoder ||
        s.angle.kind != ComponentKind::angle || s.detection.kind != ComponentKind::detection)
        throw ConfigError("checkpoint: system components out of order");
    return s;
}

inline void save_system_file(const std::string& path, const SystemCheckpoint& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("checkpoint: cannot open '" + path + "' for writing");
    save_system(os, s);
    if (!os) throw ConfigError("checkpoint: write to '" + path + "' failed");
}

inline SystemCheckpoint load_system_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("checkpoint: cannot open '" + path + "'");
    return load_system(is);
}

} // namespace jcas
