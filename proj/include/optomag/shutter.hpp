#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "optomag/error.hpp"
#include "optomag/random.hpp"

namespace optomag {

/// How many pulses a shutter opening lets through.
///  - RelativeJitter: nominal packet scaled by a factor uniform on (0, 1],
///    the same relative spread as the simulated learning rate.
///  - TimeDerived: repetition rate times an opening time uniform in range.
///  - Fixed: exactly the nominal packet.
enum class JitterMode { RelativeJitter, TimeDerived, Fixed };

inline const char* jitter_name(JitterMode m) {
    switch (m) {
    case JitterMode::RelativeJitter: return "relative";
    case JitterMode::TimeDerived: return "time";
    case JitterMode::Fixed: return "fixed";
    }
    return "?";
}

inline JitterMode parse_jitter(std::string_view s) {
    if (s == "relative") return JitterMode::RelativeJitter;
    if (s == "time") return JitterMode::TimeDerived;
    if (s == "fixed") return JitterMode::Fixed;
    throw ConfigError("unknown jitter mode '" + std::string(s) + "' (expected relative, time or fixed)");
}

struct ShutterModel {
    double open_min_ms = 15.0;
    double open_max_ms = 25.0;
    double repetition_rate_hz = 1000.0;
    long nominal_packet_pulses = 50;
    JitterMode mode = JitterMode::RelativeJitter;

    void validate() const {
        if (!(open_min_ms >= 0.0) || !(open_max_ms >= open_min_ms))
            throw ConfigError("shutter opening range must satisfy 0 <= min <= max");
        if (!(repetition_rate_hz > 0.0)) throw ConfigError("shutter.repetition_rate_hz must be positive");
        if (nominal_packet_pulses < 1) throw ConfigError("shutter.nominal_packet_pulses must be >= 1");
    }
};

/// Delivered pulse count of one shutter opening; always at least one.
inline long shutter_event(Engine& rng, const ShutterModel& model) {
    long count = model.nominal_packet_pulses;
    switch (model.mode) {
    case JitterMode::TimeDerived: {
        const double open_ms = model.open_min_ms + (model.open_max_ms - model.open_min_ms) * uniform01(rng);
        count = std::lround(model.repetition_rate_hz * open_ms / 1000.0);
        break;
    }
    case JitterMode::RelativeJitter:
        count = std::lround(static_cast<double>(model.nominal_packet_pulses) * (1.0 - uniform01(rng)));
        break;
    case JitterMode::Fixed: break;
    }
    return std::max(1L, count);
}

} // namespace optomag
