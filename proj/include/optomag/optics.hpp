#pragma once

// Faraday readout chain: written fraction -> rotation -> analyzer intensity
// -> linear camera counts, plus ROI integration, frame averaging and the
// pump write-spot geometry.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "optomag/error.hpp"
#include "optomag/random.hpp"
#include "optomag/synapse.hpp"

namespace optomag {

enum class RotationSign { Minus, Plus };

struct OpticalConstants {
    double gamma = 0.01;           ///< rotation at saturation, radians
    double delta = 0.05;           ///< analyzer offset from extinction, radians
    double probe_intensity = 6.0e8; ///< I_in, arbitrary calibrated units
    double wavelength_nm = 800.0;  ///< provenance only
    RotationSign rotation_sign = RotationSign::Minus;

    double c() const { return delta * delta / 2.0; }

    void validate() const {
        // Small-angle regime: the linearized analyzer law needs both << 1.
        if (!(std::abs(delta) > 0.0) || std::abs(delta) > 0.2)
            throw ConfigError("optics.delta must be non-zero and at most 0.2 rad");
        if (!(std::abs(gamma) >= 0.0) || std::abs(gamma) > 0.2)
            throw ConfigError("optics.gamma must be at most 0.2");
        if (!(probe_intensity >= 0.0) || !std::isfinite(probe_intensity))
            throw ConfigError("optics.probe_intensity must be non-negative");
    }
};

inline void require_fraction(double m) {
    if (!(m >= 0.0 && m <= 1.0)) throw UsageError("written fraction must lie in [0, 1]");
}

inline double faraday_rotation(double m, const OpticalConstants& k) {
    require_fraction(m);
    const double sign = k.rotation_sign == RotationSign::Minus ? -1.0 : 1.0;
    return sign * k.gamma * m;
}

/// I_out = I_in * c * (1 - m), the crossed-analyzer law linearized in m.
inline double analyzer_intensity(double m, const OpticalConstants& k) {
    require_fraction(m);
    return k.probe_intensity * k.c() * (1.0 - m);
}

struct CameraConfig {
    int width_px = 332;
    int height_px = 256;
    double pixel_scale_um = 0.5; ///< sample-plane pitch; 332 x 0.5 um = 166 um
    double exposure_time_s = 0.01;
    double gain = 1.0;           ///< counts per unit exposure I_out * t / A
    double dark_offset = 600.0;
    double read_noise_counts = 0.0;
    int bit_depth = 16;
    bool quantize = true;

    double pixel_area_um2() const { return pixel_scale_um * pixel_scale_um; }
    double full_scale() const { return std::ldexp(1.0, bit_depth) - 1.0; }

    void validate() const {
        if (width_px < 1 || height_px < 1) throw ConfigError("camera dimensions must be positive");
        if (!(pixel_scale_um > 0.0)) throw ConfigError("camera.pixel_scale_um must be positive");
        if (!(exposure_time_s >= 0.0)) throw ConfigError("camera.exposure_time_s must be >= 0");
        if (!(gain >= 0.0)) throw ConfigError("camera.gain must be >= 0");
        if (bit_depth < 1 || bit_depth > 16) throw ConfigError("camera.bit_depth must be in [1, 16]");
        if (!(dark_offset >= 0.0) || dark_offset > full_scale())
            throw ConfigError("camera.dark_offset must be within the sensor range");
        if (!(read_noise_counts >= 0.0)) throw ConfigError("camera.read_noise_counts must be >= 0");
    }
};

/// Rectangular pixel region in sensor coordinates.
struct Window {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    long pixel_count() const { return static_cast<long>(width) * height; }
    friend bool operator==(const Window&, const Window&) = default;
};

using Roi = Window;

struct Frame {
    Window window;               ///< placement of this frame on the sensor
    std::vector<double> counts;  ///< row-major, window.width * window.height
    double exposure_time_s = 0.0;
    double pixel_area_um2 = 0.0;
    int bit_depth = 16;
    bool quantized = true;
    std::size_t clipped_pixels = 0;

    int width() const { return window.width; }
    int height() const { return window.height; }

    /// Count at sensor coordinate (x, y).
    double at(int x, int y) const {
        return counts[static_cast<std::size_t>(y - window.y) * static_cast<std::size_t>(window.width) +
                      static_cast<std::size_t>(x - window.x)];
    }
};

enum class SpotProfile { FlatTop, Gaussian };

struct SpotGeometry {
    double center_x_um = 0.0;
    double center_y_um = 0.0;
    double diameter_um = 0.0;
    SpotProfile profile = SpotProfile::FlatTop;

    bool contains(double x_um, double y_um) const {
        const double r = diameter_um / 2.0;
        const double dx = x_um - center_x_um;
        const double dy = y_um - center_y_um;
        return dx * dx + dy * dy <= r * r;
    }
};

/// What the camera sees of one site: its written fraction and the local
/// probe illumination gain, rendered as a uniform disk.
struct IlluminatedSite {
    double written_fraction = 0.0;
    double background_gain = 1.0;
    SpotGeometry spot;

    static IlluminatedSite of(const SynapseSite& site, const SpotGeometry& spot) {
        return {site.written_fraction(), site.params().background_gain, spot};
    }
};

inline Window full_sensor(const CameraConfig& cam) { return {0, 0, cam.width_px, cam.height_px}; }

inline bool inside(const Window& inner, const Window& outer) {
    return inner.width > 0 && inner.height > 0 && inner.x >= outer.x && inner.y >= outer.y &&
           inner.x + inner.width <= outer.x + outer.width &&
           inner.y + inner.height <= outer.y + outer.height;
}

/// Linear camera: Z = gain * I_out * t / A + dark + noise, then optional
/// rounding and clipping to the bit depth. Pixels outside every spot see the
/// unwritten background (m = 0) at unit illumination gain.
inline Frame expose_frame(std::span<const IlluminatedSite> sites, const OpticalConstants& optics,
                          const CameraConfig& cam, Engine& rng,
                          std::optional<Window> window = std::nullopt) {
    const Window sensor = full_sensor(cam);
    const Window win = window.value_or(sensor);
    if (!inside(win, sensor)) throw UsageError("render window outside the sensor");
    const double fov_w = cam.width_px * cam.pixel_scale_um;
    const double fov_h = cam.height_px * cam.pixel_scale_um;
    for (const auto& s : sites) {
        require_fraction(s.written_fraction);
        const double r = s.spot.diameter_um / 2.0;
        if (s.spot.center_x_um - r < 0.0 || s.spot.center_y_um - r < 0.0 ||
            s.spot.center_x_um + r > fov_w || s.spot.center_y_um + r > fov_h)
            throw UsageError("spot outside the sensor field of view");
    }

    Frame f;
    f.window = win;
    f.exposure_time_s = cam.exposure_time_s;
    f.pixel_area_um2 = cam.pixel_area_um2();
    f.bit_depth = cam.bit_depth;
    f.quantized = cam.quantize;
    f.counts.resize(static_cast<std::size_t>(win.pixel_count()));

    const double scale = cam.gain * cam.exposure_time_s / cam.pixel_area_um2();
    const double full = cam.full_scale();
    std::normal_distribution<double> noise(0.0, cam.read_noise_counts);
    const bool noisy = cam.read_noise_counts > 0.0;

    std::size_t idx = 0;
    for (int py = win.y; py < win.y + win.height; ++py) {
        const double y_um = (py + 0.5) * cam.pixel_scale_um;
        for (int px = win.x; px < win.x + win.width; ++px) {
            const double x_um = (px + 0.5) * cam.pixel_scale_um;
            double m = 0.0;
            double g = 1.0;
            for (const auto& s : sites) {
                if (s.spot.contains(x_um, y_um)) {
                    m = s.written_fraction;
                    g = s.background_gain;
                    break;
                }
            }
            double z = scale * g * analyzer_intensity(m, optics) + cam.dark_offset;
            if (noisy) z += noise(rng);
            if (cam.quantize) z = std::round(z);
            if (z > full) {
                z = full;
                ++f.clipped_pixels;
            }
            f.counts[idx++] = std::max(z, 0.0);
        }
    }
    return f;
}

/// Per-pixel mean with a real accumulator, rounded at the end for quantized frames.
inline Frame average_frames(std::span<const Frame> frames) {
    if (frames.empty()) throw UsageError("average_frames needs at least one frame");
    const Frame& first = frames.front();
    Frame out = first;
    std::vector<double> acc(first.counts.size(), 0.0);
    for (const auto& f : frames) {
        if (!(f.window == first.window) || f.counts.size() != first.counts.size() ||
            f.exposure_time_s != first.exposure_time_s || f.bit_depth != first.bit_depth)
            throw UsageError("average_frames: frames differ in geometry or exposure");
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += f.counts[i];
        out.clipped_pixels = std::max(out.clipped_pixels, f.clipped_pixels);
    }
    const double n = static_cast<double>(frames.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
        const double mean = acc[i] / n;
        out.counts[i] = first.quantized ? std::round(mean) : mean;
    }
    return out;
}

inline double integrate_roi(const Frame& frame, const Roi& roi) {
    if (!inside(roi, frame.window)) throw UsageError("ROI outside frame bounds");
    double sum = 0.0;
    for (int y = roi.y; y < roi.y + roi.height; ++y)
        for (int x = roi.x; x < roi.x + roi.width; ++x) sum += frame.at(x, y);
    return sum;
}

/// Pixel ROI of the given physical size centred on a spot.
inline Roi roi_for_spot(const SpotGeometry& spot, const CameraConfig& cam, double width_um = 16.5,
                        double height_um = 15.5) {
    const int w = static_cast<int>(std::lround(width_um / cam.pixel_scale_um));
    const int h = static_cast<int>(std::lround(height_um / cam.pixel_scale_um));
    const int cx = static_cast<int>(std::lround(spot.center_x_um / cam.pixel_scale_um));
    const int cy = static_cast<int>(std::lround(spot.center_y_um / cam.pixel_scale_um));
    return {cx - w / 2, cy - h / 2, w, h};
}

struct PumpBeam {
    double power_w = 0.0;               ///< average power
    double repetition_rate_hz = 1000.0;
    double waist_diameter_um = 100.0;
    SpotProfile profile = SpotProfile::FlatTop;
    double threshold_fluence_mj_cm2 = 1.0;
    int super_gaussian_order = 8;       ///< flat-top edge steepness; 1 = Gaussian
};

/// Diameter of the region whose fluence reaches the write threshold. The
/// profile is F(r) = F0 exp(-2 (r/w)^(2N)) with N = 1 for a Gaussian and the
/// configured super-Gaussian order for a flat-top beam.
inline SpotGeometry write_spot_geometry(const PumpBeam& beam, double center_x_um = 0.0,
                                        double center_y_um = 0.0) {
    if (!(beam.power_w >= 0.0)) throw UsageError("beam power must be non-negative");
    if (!(beam.waist_diameter_um > 0.0) || !(beam.repetition_rate_hz > 0.0))
        throw UsageError("beam waist and repetition rate must be positive");
    const int order = beam.profile == SpotProfile::Gaussian ? 1 : std::max(1, beam.super_gaussian_order);
    const double n = static_cast<double>(order);
    const double w = beam.waist_diameter_um / 2.0;
    const double pulse_energy_j = beam.power_w / beam.repetition_rate_hz;
    // Integral of exp(-2 (r/w)^(2N)) over the plane.
    const double area_um2 = std::numbers::pi * w * w * std::pow(2.0, -1.0 / n) * std::tgamma(1.0 + 1.0 / n);
    const double peak_j_um2 = pulse_energy_j / area_um2;
    const double threshold_j_um2 = beam.threshold_fluence_mj_cm2 * 1e-11;

    SpotGeometry spot{center_x_um, center_y_um, 0.0, beam.profile};
    if (pulse_energy_j <= 0.0 || peak_j_um2 <= threshold_j_um2) return spot;
    const double radius = w * std::pow(std::log(peak_j_um2 / threshold_j_um2) / 2.0, 1.0 / (2.0 * n));
    spot.diameter_um = 2.0 * radius;
    return spot;
}

} // namespace optomag
