#pragma once

// Phenomenological CoPt synapse: written fraction as a function of the
// accumulated, clamped, helicity-signed pulse exposure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "optomag/error.hpp"
#include "optomag/random.hpp"

namespace optomag {

enum class Helicity { Write, Erase };
enum class SaturationDirection { Background, Written };
enum class CurveShape { Smoothstep, Logistic, Linear };

inline const char* curve_name(CurveShape s) {
    switch (s) {
    case CurveShape::Smoothstep: return "smoothstep";
    case CurveShape::Logistic: return "logistic";
    case CurveShape::Linear: return "linear";
    }
    return "?";
}

inline CurveShape parse_curve(std::string_view s) {
    if (s == "smoothstep") return CurveShape::Smoothstep;
    if (s == "logistic") return CurveShape::Logistic;
    if (s == "linear") return CurveShape::Linear;
    throw ConfigError("unknown curve shape '" + std::string(s) +
                      "' (expected smoothstep, logistic or linear)");
}

struct InhomogeneityParams {
    long dead_zone_pulses = 250;
    long saturation_pulses = 600;
    double background_gain = 1.0;

    void validate() const {
        if (dead_zone_pulses < 1) throw ConfigError("dead_zone_pulses must be positive");
        if (saturation_pulses <= dead_zone_pulses)
            throw ConfigError("dead_zone_pulses must be below saturation_pulses");
        if (!(background_gain > 0.0) || !std::isfinite(background_gain))
            throw ConfigError("background_gain must be positive");
    }

    friend bool operator==(const InhomogeneityParams&, const InhomogeneityParams&) = default;
};

/// Magnetization response to accumulated exposure. Zero up to the dead zone,
/// one from saturation on, strictly increasing and continuous in between.
struct ResponseCurve {
    CurveShape shape = CurveShape::Smoothstep;
    double logistic_steepness = 10.0;

    double operator()(long effective_pulses, const InhomogeneityParams& p) const {
        if (effective_pulses <= p.dead_zone_pulses) return 0.0;
        if (effective_pulses >= p.saturation_pulses) return 1.0;
        const double t = static_cast<double>(effective_pulses - p.dead_zone_pulses) /
                         static_cast<double>(p.saturation_pulses - p.dead_zone_pulses);
        switch (shape) {
        case CurveShape::Linear: return t;
        case CurveShape::Logistic: {
            const double k = logistic_steepness;
            auto sig = [k](double x) { return 1.0 / (1.0 + std::exp(-k * (x - 0.5))); };
            const double lo = sig(0.0);
            const double hi = sig(1.0);
            return std::clamp((sig(t) - lo) / (hi - lo), 0.0, 1.0);
        }
        case CurveShape::Smoothstep:
        default: return t * t * (3.0 - 2.0 * t);
        }
    }

    friend bool operator==(const ResponseCurve&, const ResponseCurve&) = default;
};

/// One synapse area. The state is an exposure odometer clamped to
/// [0, 2 * saturation_pulses]; that ceiling makes Write(k) followed by
/// Erase(k) exact for every k <= saturation_pulses.
class SynapseSite {
public:
    SynapseSite() = default;
    explicit SynapseSite(InhomogeneityParams params, ResponseCurve curve = {})
        : params_(params), curve_(curve) {
        params_.validate();
    }

    double written_fraction() const { return curve_(exposure_, params_); }
    long exposure() const { return exposure_; }
    long exposure_ceiling() const { return 2 * params_.saturation_pulses; }
    const InhomogeneityParams& params() const { return params_; }
    const ResponseCurve& curve() const { return curve_; }

    void apply_packet(Helicity helicity, long pulse_count) {
        if (pulse_count < 0) throw UsageError("pulse_count must be non-negative");
        const long signed_count = helicity == Helicity::Write ? pulse_count : -pulse_count;
        exposure_ = std::clamp(exposure_ + signed_count, 0L, exposure_ceiling());
    }

    void saturate(SaturationDirection direction) {
        exposure_ = direction == SaturationDirection::Background ? 0 : params_.saturation_pulses;
    }

private:
    InhomogeneityParams params_{};
    ResponseCurve curve_{};
    long exposure_ = 0;
};

inline double response_curve(long effective_pulses, const InhomogeneityParams& params,
                             const ResponseCurve& curve = {}) {
    return curve(effective_pulses, params);
}

inline SynapseSite apply_packet(SynapseSite site, Helicity helicity, long pulse_count) {
    site.apply_packet(helicity, pulse_count);
    return site;
}

inline SynapseSite saturate(SynapseSite site, SaturationDirection direction) {
    site.saturate(direction);
    return site;
}

/// Per-site parameters with independent uniform relative jitter of +/- spread
/// on dead zone, saturation and background gain.
inline std::vector<InhomogeneityParams> sample_sites(std::uint64_t seed, int n_sites, double spread,
                                                     InhomogeneityParams nominal = {}) {
    nominal.validate();
    if (n_sites < 1) throw ConfigError("n_sites must be at least 1");
    if (!(spread >= 0.0) || spread >= 1.0) throw ConfigError("spread must be in [0, 1)");
    if (static_cast<double>(nominal.dead_zone_pulses) * (1.0 + spread) >=
        static_cast<double>(nominal.saturation_pulses) * (1.0 - spread))
        throw ConfigError("spread too large: dead zone could reach saturation");

    Engine rng = make_stream(seed, Stream::Sites);
    auto jitter = [&](double value) { return value * (1.0 + spread * (2.0 * uniform01(rng) - 1.0)); };

    std::vector<InhomogeneityParams> out;
    out.reserve(static_cast<std::size_t>(n_sites));
    for (int i = 0; i < n_sites; ++i) {
        InhomogeneityParams p;
        p.dead_zone_pulses =
            std::max(1L, std::lround(jitter(static_cast<double>(nominal.dead_zone_pulses))));
        p.saturation_pulses = std::lround(jitter(static_cast<double>(nominal.saturation_pulses)));
        p.background_gain = jitter(nominal.background_gain);
        p.validate();
        out.push_back(p);
    }
    return out;
}

} // namespace optomag
