// Result rows and their CSV serialization.  Columns are fixed: sweep
// coordinates first (raw SNR, gain-corrected SNR, window length, trade-off
// weight), then metric name, value, Monte-Carlo count, and standard error.
// Coordinates that do not apply to a row are left empty.  Numbers are
// printed at full precision so that parse(emit(rows)) == rows exactly.
#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "jcas/error.hpp"

namespace jcas {

struct MetricRow {
    std::optional<double> snr_db;     // raw SNR (sigma^2 ratio), dB
    std::optional<double> snr_eff_db; // corrected by the mean beamforming gain
    std::optional<std::size_t> n_win;
    std::optional<double> w_s;
    std::string metric;
    double value = 0.0;
    std::size_t n = 1;      // Monte-Carlo count behind the value
    double std_err = 0.0;

    void validate() const {
        if (metric.empty()) throw DomainError("MetricRow: empty metric name");
        if (n < 1) throw DomainError("MetricRow: count must be >= 1");
        if (!(std_err >= 0.0)) throw DomainError("MetricRow: negative standard error");
    }

    bool operator==(const MetricRow&) const = default;
};

inline constexpr const char* metric_csv_header = "snr_db,snr_eff_db,n_win,w_s,metric,value,n,stderr";

namespace detail {

inline std::string csv_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_opt(const std::optional<double>& v) {
    return v ? csv_num(*v) : std::string{};
}

inline std::vector<std::string> csv_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::optional<double> parse_opt_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw ConfigError("metrics csv: bad number '" + s + "'");
    return v;
}

} // namespace detail

// `stamp` lines (config hash, seed) are emitted as leading comments.
inline std::string emit_metrics_csv(std::span<const MetricRow> rows,
                                    std::span<const std::string> stamps = {}) {
    std::ostringstream os;
    for (const std::string& s : stamps) os << "# " << s << '\n';
    os << metric_csv_header << '\n';
    for (const MetricRow& r : rows) {
        r.validate();
        os << detail::csv_opt(r.snr_db) << ',' << detail::csv_opt(r.snr_eff_db) << ',';
        if (r.n_win) os << *r.n_win;
        os << ',' << detail::csv_opt(r.w_s) << ',' << r.metric << ','
           << detail::csv_num(r.value) << ',' << r.n << ',' << detail::csv_num(r.std_err) << '\n';
    }
    return os.str();
}

inline std::vector<MetricRow> parse_metrics_csv(std::istream& is) {
    std::vector<MetricRow> rows;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != metric_csv_header)
                throw ConfigError("metrics csv: unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        const auto f = detail::csv_fields(line);
        if (f.size() != 8) throw ConfigError("metrics csv: expected 8 fields, got row '" + line + "'");
        try {
            MetricRow r;
            r.snr_db = detail::parse_opt_double(f[0]);
            r.snr_eff_db = detail::parse_opt_double(f[1]);
            if (!f[2].empty()) r.n_win = static_cast<std::size_t>(std::stoull(f[2]));
            r.w_s = detail::parse_opt_double(f[3]);
            r.metric = f[4];
            r.value = std::stod(f[5]);
            r.n = static_cast<std::size_t>(std::stoull(f[6]));
            r.std_err = std::stod(f[7]);
            r.validate();
            rows.push_back(std::move(r));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("metrics csv: bad row '" + line + "': " + e.what());
        }
    }
    if (!header_seen) throw ConfigError("metrics csv: missing header");
    return rows;
}

inline std::vector<MetricRow> load_metrics_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("metrics csv: cannot open " + path);
    return parse_metrics_csv(is);
}

} // namespace jcas
