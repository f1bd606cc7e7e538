// Per-window detection threshold offsets produced by the limiting phase.
#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "jcas/error.hpp"

namespace jcas {

struct CalibrationTable {
    double false_alarm_target = 1e-2;
    std::map<std::size_t, double> offsets; // window length -> pre-sigmoid offset

    bool covers(std::size_t lo, std::size_t hi) const {
        for (std::size_t n = lo; n <= hi; ++n)
            if (!offsets.contains(n)) return false;
        return true;
    }

    double offset_for(std::size_t window_len) const {
        const auto it = offsets.find(window_len);
        if (it == offsets.end())
            throw ConfigError("calibration: no threshold for window length " +
                              std::to_string(window_len));
        return it->second;
    }
};

} // namespace jcas
