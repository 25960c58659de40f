#pragma once

// Run configuration: flat `section.key = value` text, one key per line,
// '#' comment lines. Unknown keys, duplicates and out-of-range values are
// rejected with the offending line number.

#include <cerrno>
#include <charconv>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "optomag/energy.hpp"
#include "optomag/error.hpp"
#include "optomag/optics.hpp"
#include "optomag/pattern_bank.hpp"
#include "optomag/rig.hpp"
#include "optomag/shutter.hpp"
#include "optomag/synapse.hpp"
#include "optomag/trainer.hpp"

namespace optomag {

enum class Mode { Simulate, Emulate, Dataset, Energy, Sweep };

inline const char* mode_name(Mode m) {
    switch (m) {
    case Mode::Simulate: return "simulate";
    case Mode::Emulate: return "emulate";
    case Mode::Dataset: return "dataset";
    case Mode::Energy: return "energy";
    case Mode::Sweep: return "sweep";
    }
    return "?";
}

inline Mode parse_mode(std::string_view s) {
    if (s == "simulate") return Mode::Simulate;
    if (s == "emulate") return Mode::Emulate;
    if (s == "dataset") return Mode::Dataset;
    if (s == "energy") return Mode::Energy;
    if (s == "sweep") return Mode::Sweep;
    throw ConfigError("unknown mode '" + std::string(s) + "'");
}

struct EnergyConfig {
    double calibration_power_w = 8.25e-7;
    double waist_diameter_um = 100.0;
    std::vector<double> spot_diameters_um{20.0, 34.0};
    double read_energy_nj = 0.4;
};

struct SweepConfig {
    int seeds = 50;
    Mode mode = Mode::Simulate;
};

struct OutputConfig {
    std::string dir = "out";
    bool verbose = false;
    bool frames = false;
    int frame_interval = 100;
};

struct RunConfig {
    Mode mode = Mode::Simulate;
    std::uint64_t seed = 1;
    std::string bitmaps_path; ///< empty: built-in z/v/n
    TrainerConfig trainer;
    SynapseConfig synapse;
    OpticalConstants optics;
    CameraConfig camera;
    ShutterModel shutter;
    RigConfig rig;
    EnergyConfig energy;
    SweepConfig sweep;
    OutputConfig output;

    /// Cross-field invariants; single-field bounds are enforced on parse.
    void validate() const {
        trainer.validate();
        synapse.nominal.validate();
        optics.validate();
        camera.validate();
        shutter.validate();
        rig.validate();
        if (synapse.spread < 0.0 || synapse.spread >= 1.0 ||
            static_cast<double>(synapse.nominal.dead_zone_pulses) * (1.0 + synapse.spread) >=
                static_cast<double>(synapse.nominal.saturation_pulses) * (1.0 - synapse.spread))
            throw ConfigError("synapse.spread too large for the nominal dead zone and saturation");
        if (sweep.mode != Mode::Simulate && sweep.mode != Mode::Emulate)
            throw ConfigError("sweep.mode must be simulate or emulate");
    }

    EnergyBeam energy_beam() const {
        return {energy.calibration_power_w, shutter.repetition_rate_hz, energy.waist_diameter_um};
    }

    LedgerConfig ledger_config() const {
        SpotGeometry spot;
        spot.diameter_um = rig.spot_diameter_um;
        return {energy_per_pulse(energy_beam(), spot), energy.read_energy_nj * 1e-9, true};
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double to_double(std::string_view v, double lo, double hi, bool lo_open = false) {
    const std::string s(v);
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(x))
        throw ConfigError("expected a number, got '" + s + "'");
    if (x > hi || x < lo || (lo_open && x == lo))
        throw ConfigError(fmt::format("value {} outside {}{}, {}]", s, lo_open ? "(" : "[", lo, hi));
    return x;
}

inline long long to_int(std::string_view v, long long lo, long long hi) {
    long long x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError("expected an integer, got '" + std::string(v) + "'");
    if (x < lo || x > hi) throw ConfigError(fmt::format("value {} outside [{}, {}]", x, lo, hi));
    return x;
}

inline std::uint64_t to_u64(std::string_view v) {
    std::uint64_t x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError("expected a non-negative integer, got '" + std::string(v) + "'");
    return x;
}

inline bool to_bool(std::string_view v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("expected true or false, got '" + std::string(v) + "'");
}

inline std::vector<double> to_list(std::string_view v, double lo, double hi) {
    std::vector<double> out;
    std::string s(v);
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item), lo, hi, true));
    if (out.empty()) throw ConfigError("expected a comma-separated list");
    return out;
}

inline std::string fmt_double(double x) { return fmt::format("{}", x); }
inline std::string fmt_bool(bool b) { return b ? "true" : "false"; }

struct KeySpec {
    std::string_view name;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

// NOLINTBEGIN(readability-function-size)
inline const std::vector<KeySpec>& key_table() {
    using C = RunConfig;
    using V = std::string_view;
    constexpr double kBig = 1e15;
    static const std::vector<KeySpec> table = {
        {"mode", [](C& c, V v) { c.mode = parse_mode(v); }, [](const C& c) { return std::string(mode_name(c.mode)); }},
        {"seed", [](C& c, V v) { c.seed = to_u64(v); }, [](const C& c) { return std::to_string(c.seed); }},
        {"dataset.bitmaps", [](C& c, V v) { c.bitmaps_path = std::string(v); }, [](const C& c) { return c.bitmaps_path; }},

        {"trainer.initial_weight", [](C& c, V v) { c.trainer.initial_weight = to_double(v, -10.0, 10.0); },
         [](const C& c) { return fmt_double(c.trainer.initial_weight); }},
        {"trainer.initial_threshold", [](C& c, V v) { c.trainer.initial_threshold = to_double(v, 0.0, 1e6, true); },
         [](const C& c) { return fmt_double(c.trainer.initial_threshold); }},
        {"trainer.eta_max", [](C& c, V v) { c.trainer.eta_max = to_double(v, 0.0, 1.0, true); },
         [](const C& c) { return fmt_double(c.trainer.eta_max); }},
        {"trainer.max_epochs", [](C& c, V v) { c.trainer.max_epochs = static_cast<int>(to_int(v, 1, 1000000)); },
         [](const C& c) { return std::to_string(c.trainer.max_epochs); }},
        {"trainer.target_class", [](C& c, V v) { c.trainer.target_class = parse_class(v); },
         [](const C& c) { return std::string(1, class_letter(c.trainer.target_class)); }},
        {"trainer.raise_fraction", [](C& c, V v) { c.trainer.raise_fraction = to_double(v, 0.0, 1.0, true); },
         [](const C& c) { return fmt_double(c.trainer.raise_fraction); }},
        {"trainer.reset_on_raise", [](C& c, V v) { c.trainer.reset_on_raise = to_bool(v); },
         [](const C& c) { return fmt_bool(c.trainer.reset_on_raise); }},
        {"trainer.fixed_eta", [](C& c, V v) { c.trainer.fixed_eta = to_bool(v); },
         [](const C& c) { return fmt_bool(c.trainer.fixed_eta); }},

        {"synapse.dead_zone_pulses", [](C& c, V v) { c.synapse.nominal.dead_zone_pulses = static_cast<long>(to_int(v, 1, 10000000)); },
         [](const C& c) { return std::to_string(c.synapse.nominal.dead_zone_pulses); }},
        {"synapse.saturation_pulses", [](C& c, V v) { c.synapse.nominal.saturation_pulses = static_cast<long>(to_int(v, 2, 10000000)); },
         [](const C& c) { return std::to_string(c.synapse.nominal.saturation_pulses); }},
        {"synapse.background_gain", [](C& c, V v) { c.synapse.nominal.background_gain = to_double(v, 0.0, 10.0, true); },
         [](const C& c) { return fmt_double(c.synapse.nominal.background_gain); }},
        {"synapse.spread", [](C& c, V v) { c.synapse.spread = to_double(v, 0.0, 0.99); },
         [](const C& c) { return fmt_double(c.synapse.spread); }},
        {"synapse.curve", [](C& c, V v) { c.synapse.curve.shape = parse_curve(v); },
         [](const C& c) { return std::string(curve_name(c.synapse.curve.shape)); }},
        {"synapse.logistic_steepness", [](C& c, V v) { c.synapse.curve.logistic_steepness = to_double(v, 0.0, 100.0, true); },
         [](const C& c) { return fmt_double(c.synapse.curve.logistic_steepness); }},

        {"optics.gamma", [](C& c, V v) { c.optics.gamma = to_double(v, 0.0, 0.2); },
         [](const C& c) { return fmt_double(c.optics.gamma); }},
        {"optics.delta", [](C& c, V v) { c.optics.delta = to_double(v, 0.0, 0.2, true); },
         [](const C& c) { return fmt_double(c.optics.delta); }},
        {"optics.probe_intensity", [](C& c, V v) { c.optics.probe_intensity = to_double(v, 0.0, kBig); },
         [](const C& c) { return fmt_double(c.optics.probe_intensity); }},
        {"optics.wavelength_nm", [](C& c, V v) { c.optics.wavelength_nm = to_double(v, 0.0, 1e5, true); },
         [](const C& c) { return fmt_double(c.optics.wavelength_nm); }},
        {"optics.rotation_sign",
         [](C& c, V v) {
             if (v == "minus") c.optics.rotation_sign = RotationSign::Minus;
             else if (v == "plus") c.optics.rotation_sign = RotationSign::Plus;
             else throw ConfigError("expected minus or plus");
         },
         [](const C& c) { return std::string(c.optics.rotation_sign == RotationSign::Minus ? "minus" : "plus"); }},

        {"camera.width_px", [](C& c, V v) { c.camera.width_px = static_cast<int>(to_int(v, 1, 8192)); },
         [](const C& c) { return std::to_string(c.camera.width_px); }},
        {"camera.height_px", [](C& c, V v) { c.camera.height_px = static_cast<int>(to_int(v, 1, 8192)); },
         [](const C& c) { return std::to_string(c.camera.height_px); }},
        {"camera.pixel_scale_um", [](C& c, V v) { c.camera.pixel_scale_um = to_double(v, 0.0, 100.0, true); },
         [](const C& c) { return fmt_double(c.camera.pixel_scale_um); }},
        {"camera.exposure_time_s", [](C& c, V v) { c.camera.exposure_time_s = to_double(v, 0.0, 10.0); },
         [](const C& c) { return fmt_double(c.camera.exposure_time_s); }},
        {"camera.gain", [](C& c, V v) { c.camera.gain = to_double(v, 0.0, kBig); },
         [](const C& c) { return fmt_double(c.camera.gain); }},
        {"camera.dark_offset", [](C& c, V v) { c.camera.dark_offset = to_double(v, 0.0, 65535.0); },
         [](const C& c) { return fmt_double(c.camera.dark_offset); }},
        {"camera.read_noise_counts", [](C& c, V v) { c.camera.read_noise_counts = to_double(v, 0.0, 65535.0); },
         [](const C& c) { return fmt_double(c.camera.read_noise_counts); }},
        {"camera.bit_depth", [](C& c, V v) { c.camera.bit_depth = static_cast<int>(to_int(v, 1, 16)); },
         [](const C& c) { return std::to_string(c.camera.bit_depth); }},
        {"camera.quantize", [](C& c, V v) { c.camera.quantize = to_bool(v); },
         [](const C& c) { return fmt_bool(c.camera.quantize); }},

        {"shutter.open_min_ms", [](C& c, V v) { c.shutter.open_min_ms = to_double(v, 0.0, 10000.0); },
         [](const C& c) { return fmt_double(c.shutter.open_min_ms); }},
        {"shutter.open_max_ms", [](C& c, V v) { c.shutter.open_max_ms = to_double(v, 0.0, 10000.0); },
         [](const C& c) { return fmt_double(c.shutter.open_max_ms); }},
        {"shutter.repetition_rate_hz", [](C& c, V v) { c.shutter.repetition_rate_hz = to_double(v, 0.0, 1e9, true); },
         [](const C& c) { return fmt_double(c.shutter.repetition_rate_hz); }},
        {"shutter.nominal_packet_pulses", [](C& c, V v) { c.shutter.nominal_packet_pulses = static_cast<long>(to_int(v, 1, 1000000)); },
         [](const C& c) { return std::to_string(c.shutter.nominal_packet_pulses); }},
        {"shutter.jitter_mode", [](C& c, V v) { c.shutter.mode = parse_jitter(v); },
         [](const C& c) { return std::string(jitter_name(c.shutter.mode)); }},

        {"rig.spot_diameter_um", [](C& c, V v) { c.rig.spot_diameter_um = to_double(v, 0.0, 1e4, true); },
         [](const C& c) { return fmt_double(c.rig.spot_diameter_um); }},
        {"rig.site_pitch_um", [](C& c, V v) { c.rig.site_pitch_um = to_double(v, 0.0, 1e4, true); },
         [](const C& c) { return fmt_double(c.rig.site_pitch_um); }},
        {"rig.grid_origin_x_um", [](C& c, V v) { c.rig.grid_origin_x_um = to_double(v, 0.0, 1e5); },
         [](const C& c) { return fmt_double(c.rig.grid_origin_x_um); }},
        {"rig.grid_origin_y_um", [](C& c, V v) { c.rig.grid_origin_y_um = to_double(v, 0.0, 1e5); },
         [](const C& c) { return fmt_double(c.rig.grid_origin_y_um); }},
        {"rig.threshold_x_um", [](C& c, V v) { c.rig.threshold_x_um = to_double(v, 0.0, 1e5); },
         [](const C& c) { return fmt_double(c.rig.threshold_x_um); }},
        {"rig.threshold_y_um", [](C& c, V v) { c.rig.threshold_y_um = to_double(v, 0.0, 1e5); },
         [](const C& c) { return fmt_double(c.rig.threshold_y_um); }},
        {"rig.roi_width_um", [](C& c, V v) { c.rig.roi_width_um = to_double(v, 0.0, 1e4, true); },
         [](const C& c) { return fmt_double(c.rig.roi_width_um); }},
        {"rig.roi_height_um", [](C& c, V v) { c.rig.roi_height_um = to_double(v, 0.0, 1e4, true); },
         [](const C& c) { return fmt_double(c.rig.roi_height_um); }},
        {"rig.init_weight_packets", [](C& c, V v) { c.rig.init_weight_packets = static_cast<int>(to_int(v, 0, 100000)); },
         [](const C& c) { return std::to_string(c.rig.init_weight_packets); }},
        {"rig.threshold_packets", [](C& c, V v) { c.rig.threshold_packets = static_cast<int>(to_int(v, 0, 100000)); },
         [](const C& c) { return std::to_string(c.rig.threshold_packets); }},
        {"rig.learning_packets", [](C& c, V v) { c.rig.learning_packets = static_cast<int>(to_int(v, 1, 10000)); },
         [](const C& c) { return std::to_string(c.rig.learning_packets); }},
        {"rig.frames_per_read", [](C& c, V v) { c.rig.frames_per_read = static_cast<int>(to_int(v, 1, 1000)); },
         [](const C& c) { return std::to_string(c.rig.frames_per_read); }},
        {"rig.reread_threshold", [](C& c, V v) { c.rig.reread_threshold = to_bool(v); },
         [](const C& c) { return fmt_bool(c.rig.reread_threshold); }},
        {"rig.write_handedness",
         [](C& c, V v) {
             if (v != "right" && v != "left") throw ConfigError("expected right or left");
             c.rig.write_handedness = std::string(v);
         },
         [](const C& c) { return c.rig.write_handedness; }},

        {"energy.calibration_power_w", [](C& c, V v) { c.energy.calibration_power_w = to_double(v, 0.0, 10.0); },
         [](const C& c) { return fmt_double(c.energy.calibration_power_w); }},
        {"energy.waist_diameter_um", [](C& c, V v) { c.energy.waist_diameter_um = to_double(v, 0.0, 1e5, true); },
         [](const C& c) { return fmt_double(c.energy.waist_diameter_um); }},
        {"energy.spot_diameters_um", [](C& c, V v) { c.energy.spot_diameters_um = to_list(v, 0.0, 1e5); },
         [](const C& c) { return fmt::format("{}", fmt::join(c.energy.spot_diameters_um, ",")); }},
        {"energy.read_energy_nj", [](C& c, V v) { c.energy.read_energy_nj = to_double(v, 0.0, 1e6); },
         [](const C& c) { return fmt_double(c.energy.read_energy_nj); }},

        {"sweep.seeds", [](C& c, V v) { c.sweep.seeds = static_cast<int>(to_int(v, 1, 100000)); },
         [](const C& c) { return std::to_string(c.sweep.seeds); }},
        {"sweep.mode", [](C& c, V v) { c.sweep.mode = parse_mode(v); },
         [](const C& c) { return std::string(mode_name(c.sweep.mode)); }},

        {"output.dir", [](C& c, V v) { c.output.dir = std::string(v); }, [](const C& c) { return c.output.dir; }},
        {"output.verbose", [](C& c, V v) { c.output.verbose = to_bool(v); },
         [](const C& c) { return fmt_bool(c.output.verbose); }},
        {"output.frames", [](C& c, V v) { c.output.frames = to_bool(v); },
         [](const C& c) { return fmt_bool(c.output.frames); }},
        {"output.frame_interval", [](C& c, V v) { c.output.frame_interval = static_cast<int>(to_int(v, 1, 1000000)); },
         [](const C& c) { return std::to_string(c.output.frame_interval); }},
    };
    return table;
}
// NOLINTEND(readability-function-size)

inline const KeySpec* find_key(std::string_view name) {
    for (const auto& k : key_table())
        if (k.name == name) return &k;
    return nullptr;
}

} // namespace detail

/// Sets one key; throws ConfigError without location information.
inline void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
    const auto* spec = detail::find_key(key);
    if (spec == nullptr) throw ConfigError("unknown key '" + std::string(key) + "'");
    spec->set(cfg, value);
}

inline RunConfig parse_config(std::istream& in, const std::string& source = "config") {
    RunConfig cfg;
    std::map<std::string, int, std::less<>> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto where = fmt::format("{}:{}: ", source, line_no);
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ConfigError(where + "missing key");
        if (auto it = seen.find(key); it != seen.end())
            throw ConfigError(where + fmt::format("duplicate key '{}' (first set on line {})", key, it->second));
        seen.emplace(key, line_no);
        try {
            set_config_value(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + key + ": " + e.what());
        }
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        // Point at the last line that set a key (or a key of the section)
        // named in the message.
        const std::string msg = e.what();
        int best = 0;
        for (const auto& [key, ln] : seen) {
            const auto dot = key.find('.');
            const bool named = msg.find(key.substr(dot + 1)) != std::string::npos ||
                               (dot != std::string::npos && msg.find(key.substr(0, dot)) != std::string::npos);
            if (named && ln > best) best = ln;
        }
        throw ConfigError(best > 0 ? fmt::format("{}:{}: {}", source, best, msg) : source + ": " + msg);
    }
    return cfg;
}

inline RunConfig parse_config_text(const std::string& text, const std::string& source = "config") {
    std::istringstream in(text);
    return parse_config(in, source);
}

/// Every key with its resolved value, in canonical order.
inline std::string to_text(const RunConfig& cfg) {
    std::string out = "# optomag resolved configuration v1\n";
    for (const auto& k : detail::key_table()) out += fmt::format("{} = {}\n", k.name, k.get(cfg));
    return out;
}

inline std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& k : detail::key_table()) out.emplace_back(k.name);
    return out;
}

} // namespace optomag
