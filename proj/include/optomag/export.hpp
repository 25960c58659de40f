#pragma once

// Plot-ready exports. Every CSV starts with a "# optomag <name> v<N>" line;
// bump the version when a column changes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "optomag/error.hpp"
#include "optomag/optics.hpp"
#include "optomag/pattern_bank.hpp"
#include "optomag/trainer.hpp"

namespace optomag {

inline constexpr int kCsvSchemaVersion = 1;

inline std::string csv_preamble(std::string_view name) {
    return fmt::format("# optomag {} v{}\n", name, kCsvSchemaVersion);
}

/// Writes via a temporary file and rename, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string dataset_csv(const Dataset& ds) {
    std::string out = csv_preamble("dataset");
    out += "pattern_id,class,variant,role,x1,x2,x3,x4,x5,x6,x7,x8,x9\n";
    for (const auto& p : bar_order(ds)) {
        out += fmt::format("{},{},{},{}", p.id(), class_letter(p.cls), p.variant, role_name(p.role));
        for (auto x : p.inputs) out += fmt::format(",{}", x);
        out += '\n';
    }
    return out;
}

inline long step_pulses(const StepRecord& s) {
    long n = 0;
    for (const auto& u : s.updates) n += u.pulses;
    return n;
}

inline std::string trace_csv(const TrainingTrace& trace) {
    std::string out = csv_preamble("trace");
    out += "step,epoch,pattern,class,output,threshold,action,eta,pulses,site_reads\n";
    for (const auto& s : trace.steps)
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", s.step, s.epoch, s.pattern_id, class_letter(s.cls),
                           s.output, s.threshold, decision_name(s.action), s.eta, step_pulses(s), s.site_reads);
    return out;
}

/// Weights and threshold per step divided by `scale` (1 in simulation, the
/// mean background sum in emulation) so both modes plot on one axis.
inline std::string learning_curve_csv(const TrainingTrace& trace, double scale = 1.0) {
    if (!(scale > 0.0)) throw UsageError("learning curve scale must be positive");
    std::string out = csv_preamble("learning_curve");
    out += "step,epoch,output,threshold,w1,w2,w3,w4,w5,w6,w7,w8,w9\n";
    for (const auto& s : trace.steps) {
        out += fmt::format("{},{},{},{}", s.step, s.epoch, s.output / scale, s.threshold / scale);
        for (double w : s.weights) out += fmt::format(",{}", w / scale);
        out += '\n';
    }
    return out;
}

inline std::string bars_csv(std::span<const PatternResult> results, double threshold, PatternClass target,
                            double scale = 1.0) {
    std::string out = csv_preamble("bars");
    out += "index,pattern,class,role,output,threshold,desired,accepted\n";
    int index = 0;
    for (const auto& r : results)
        out += fmt::format("{},{},{},{},{},{},{},{}\n", ++index, r.id, class_letter(r.cls), role_name(r.role),
                           r.output / scale, threshold / scale, r.cls == target ? "above" : "below",
                           r.accepted ? 1 : 0);
    return out;
}

struct SweepRow {
    std::uint64_t seed = 0;
    bool converged = false;
    long steps = 0;
    int epochs = 0;
    int threshold_raises = 0;
    int test_correct = 0;
    int test_total = 0;
};

inline std::string sweep_csv(std::span<const SweepRow> rows, std::string_view mode) {
    std::string out = csv_preamble("sweep");
    out += "seed,mode,converged,steps,epochs,threshold_raises,test_correct,test_total,test_accuracy\n";
    for (const auto& r : rows) {
        const double acc = r.test_total > 0 ? static_cast<double>(r.test_correct) / r.test_total : 0.0;
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.seed, mode, r.converged ? 1 : 0, r.steps, r.epochs,
                           r.threshold_raises, r.test_correct, r.test_total, acc);
    }
    return out;
}

inline nlohmann::json step_json(const StepRecord& s) {
    nlohmann::json updates = nlohmann::json::array();
    for (const auto& u : s.updates)
        updates.push_back({{"site", u.site},
                           {"pulses", u.pulses},
                           {"helicity", u.helicity == Helicity::Write ? "write" : "erase"}});
    return {{"step", s.step},           {"epoch", s.epoch},
            {"pattern", s.pattern_id},  {"class", std::string(1, class_letter(s.cls))},
            {"output", s.output},       {"threshold", s.threshold},
            {"action", decision_name(s.action)}, {"eta", s.eta},
            {"updates", updates},       {"site_reads", s.site_reads},
            {"weights", s.weights}};
}

inline nlohmann::json summary_json(const TrainingSummary& s) {
    return {{"converged", s.converged},
            {"total_steps", s.total_steps},
            {"epochs", s.epochs},
            {"threshold_raises", s.threshold_raises},
            {"raise_steps", s.raise_steps},
            {"final_weights", s.final_weights},
            {"final_threshold", s.final_threshold}};
}

inline nlohmann::json trace_json(const TrainingTrace& trace) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : trace.steps) steps.push_back(step_json(s));
    nlohmann::json init = nlohmann::json::array();
    for (const auto& u : trace.init_updates) init.push_back({{"site", u.site}, {"pulses", u.pulses}});
    return {{"summary", summary_json(trace.summary)},
            {"init_updates", init},
            {"init_reads", trace.init_reads},
            {"steps", steps}};
}

inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

/// Binary PGM: 8-bit samples up to bit depth 8, big-endian 16-bit above.
inline std::string frame_pgm(const Frame& f) {
    const int maxval = (1 << f.bit_depth) - 1;
    std::string out = fmt::format("P5\n{} {}\n{}\n", f.window.width, f.window.height, maxval);
    out.reserve(out.size() + f.counts.size() * 2);
    for (double c : f.counts) {
        const auto v = static_cast<std::uint32_t>(std::clamp(std::lround(c), 0L, static_cast<long>(maxval)));
        if (maxval > 255) out += static_cast<char>((v >> 8) & 0xFF);
        out += static_cast<char>(v & 0xFF);
    }
    return out;
}

inline nlohmann::json frame_sidecar(const Frame& f, const CameraConfig& cam, const OpticalConstants& optics) {
    return {{"width", f.window.width},
            {"height", f.window.height},
            {"origin_x", f.window.x},
            {"origin_y", f.window.y},
            {"exposure_time_s", f.exposure_time_s},
            {"pixel_area_um2", f.pixel_area_um2},
            {"pixel_scale_um", cam.pixel_scale_um},
            {"bit_depth", f.bit_depth},
            {"quantized", f.quantized},
            {"clipped_pixels", f.clipped_pixels},
            {"gain", cam.gain},
            {"dark_offset", cam.dark_offset},
            {"read_noise_counts", cam.read_noise_counts},
            {"analyzer_offset_rad", optics.delta},
            {"rotation_at_saturation_rad", optics.gamma},
            {"probe_intensity", optics.probe_intensity},
            {"wavelength_nm", optics.wavelength_nm}};
}

} // namespace optomag
