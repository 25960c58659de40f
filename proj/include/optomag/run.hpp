#pragma once

// Run orchestration for the five CLI modes. Everything written to the output
// directory is a function of the resolved configuration and seed.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "optomag/config.hpp"
#include "optomag/energy.hpp"
#include "optomag/error.hpp"
#include "optomag/export.hpp"
#include "optomag/pattern_bank.hpp"
#include "optomag/rig.hpp"
#include "optomag/trainer.hpp"
#include "optomag/weight_engine.hpp"

namespace optomag {

inline Bitmaps load_bitmaps(const RunConfig& cfg) {
    if (cfg.bitmaps_path.empty()) return Bitmaps::defaults();
    std::ifstream in(cfg.bitmaps_path);
    if (!in) throw IoError("cannot open bitmap file " + cfg.bitmaps_path);
    return parse_bitmaps(in, cfg.bitmaps_path);
}

struct RunResult {
    Dataset dataset;
    TrainingTrace trace;
    std::vector<PatternResult> pre;  ///< bar order, initial weights
    std::vector<PatternResult> post; ///< bar order, final weights
    std::vector<PatternResult> test;
    double scale = 1.0;              ///< count scale to dimensionless
    double initial_threshold = 0.0;

    int test_correct() const { return count_accepted(test); }
};

namespace detail {

inline void finish(RunResult& r, const WeightVector& initial_weights, PatternClass target) {
    const auto bars = bar_order(r.dataset);
    r.pre = evaluate_patterns(initial_weights, r.initial_threshold, bars, target);
    const auto& s = r.trace.summary;
    r.post = evaluate_patterns(s.final_weights, s.final_threshold, bars, target);
    r.test = evaluate_test(s.final_weights, s.final_threshold, r.dataset.testing, target);
}

} // namespace detail

inline RunResult run_simulation(const RunConfig& cfg, std::uint64_t seed, const Bitmaps& bitmaps) {
    RunResult r;
    r.dataset = build_dataset(bitmaps, cfg.trainer.target_class);
    const long pulses_per_eta_max =
        static_cast<long>(cfg.rig.learning_packets) * cfg.shutter.nominal_packet_pulses;
    SimulatedWeights backend(cfg.trainer, seed, pulses_per_eta_max);
    const WeightVector w0 = backend.weights();
    r.initial_threshold = backend.threshold();
    r.trace = train(r.dataset, cfg.trainer, backend);
    detail::finish(r, w0, cfg.trainer.target_class);
    return r;
}

struct EmulationOptions {
    bool snapshots = false;  ///< WeightState after every learning step
    int frame_interval = 0;  ///< 0: no frame dumps
};

struct EmulationResult : RunResult {
    std::vector<InhomogeneityParams> site_params;
    std::vector<std::pair<long, WeightState>> snapshots; ///< step 0 is the initialized state
    std::vector<std::pair<std::string, Frame>> frames;
    SequencingCounters sequencing;
    long site_reads = 0;
    WeightState final_state;
    std::array<Roi, kSiteCount> rois{};
};

inline EmulatedRig make_rig(const RunConfig& cfg, std::uint64_t seed,
                            std::optional<std::vector<InhomogeneityParams>> site_params = std::nullopt) {
    return EmulatedRig(cfg.rig, cfg.synapse, cfg.optics, cfg.camera, cfg.shutter, seed, std::move(site_params));
}

inline EmulationResult run_emulation(const RunConfig& cfg, std::uint64_t seed, const Bitmaps& bitmaps,
                                     const EmulationOptions& opts = {},
                                     std::optional<std::vector<InhomogeneityParams>> site_params = std::nullopt) {
    EmulationResult r;
    r.dataset = build_dataset(bitmaps, cfg.trainer.target_class);
    EmulatedRig rig = make_rig(cfg, seed, std::move(site_params));
    const bool dump = opts.frame_interval > 0;
    rig.capture_backgrounds();
    if (dump) r.frames.emplace_back("background", rig.render());
    rig.initialize_network();
    if (dump) r.frames.emplace_back("init", rig.render());
    if (opts.snapshots) r.snapshots.emplace_back(0, rig.state());
    r.scale = rig.normalization_scale();
    r.initial_threshold = rig.threshold();
    const WeightVector w0 = rig.weights();
    const long init_reads = rig.site_reads(); // background captures plus the post-write read
    r.trace = train(r.dataset, cfg.trainer, rig, [&](const StepRecord& s, const EmulatedRig& b) {
        if (opts.snapshots && s.action != Decision::Accept) r.snapshots.emplace_back(s.step, b.state());
        if (dump && s.step % opts.frame_interval == 0)
            r.frames.emplace_back(fmt::format("step_{:06}", s.step), rig.render());
    });
    r.trace.init_updates = rig.init_updates();
    r.trace.init_reads = static_cast<int>(init_reads);
    if (dump) r.frames.emplace_back("final", rig.render());
    detail::finish(r, w0, cfg.trainer.target_class);
    r.site_params = rig.site_params();
    r.sequencing = rig.sequencing();
    r.site_reads = rig.site_reads();
    r.final_state = rig.state();
    r.rois = rig.rois();
    return r;
}

inline SweepRow sweep_row(const RunResult& r, std::uint64_t seed) {
    const auto& s = r.trace.summary;
    return {seed, s.converged, s.total_steps, s.epochs, s.threshold_raises, r.test_correct(),
            static_cast<int>(r.test.size())};
}

/// One row per seed (base, base + 1, ...), in seed order whatever the
/// completion order of the worker threads.
inline std::vector<SweepRow> run_sweep(const RunConfig& cfg, const Bitmaps& bitmaps, unsigned workers = 0) {
    const auto n = static_cast<std::size_t>(cfg.sweep.seeds);
    std::vector<SweepRow> rows(n);
    if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
    auto one = [&](std::size_t i) {
        const std::uint64_t seed = cfg.seed + i;
        if (cfg.sweep.mode == Mode::Emulate) return sweep_row(run_emulation(cfg, seed, bitmaps), seed);
        return sweep_row(run_simulation(cfg, seed, bitmaps), seed);
    };
    for (std::size_t start = 0; start < n; start += workers) {
        const std::size_t stop = std::min(n, start + workers);
        std::vector<std::future<SweepRow>> batch;
        for (std::size_t i = start; i < stop; ++i) batch.push_back(std::async(std::launch::async, one, i));
        for (std::size_t i = start; i < stop; ++i) rows[i] = batch[i - start].get();
    }
    return rows;
}

namespace detail {

inline nlohmann::json results_json(std::span<const PatternResult> rs, double scale) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rs)
        out.push_back({{"pattern", r.id}, {"output", r.output / scale}, {"accepted", r.accepted}});
    return out;
}

inline nlohmann::json run_summary(const RunConfig& cfg, const RunResult& r, std::uint64_t seed) {
    nlohmann::json j = summary_json(r.trace.summary);
    j["mode"] = mode_name(cfg.mode);
    j["seed"] = seed;
    j["normalization_scale"] = r.scale;
    j["initial_threshold"] = r.initial_threshold;
    j["updates"] = r.trace.update_count();
    j["training_accepted"] = count_accepted(std::span<const PatternResult>(r.post)) - r.test_correct();
    j["test_correct"] = r.test_correct();
    j["test_total"] = r.test.size();
    j["test"] = results_json(r.test, r.scale);
    return j;
}

inline void write_training_outputs(const std::filesystem::path& dir, const RunConfig& cfg, const RunResult& r,
                                   std::uint64_t seed) {
    const auto target = cfg.trainer.target_class;
    write_file_atomic(dir / "bars_pre.csv", bars_csv(r.pre, r.initial_threshold, target, r.scale));
    write_file_atomic(dir / "bars_post.csv", bars_csv(r.post, r.trace.summary.final_threshold, target, r.scale));
    write_file_atomic(dir / "learning_curve.csv", learning_curve_csv(r.trace, r.scale));
    write_file_atomic(dir / "trace.csv", trace_csv(r.trace));
    write_file_atomic(dir / "trace.json", dump_json(trace_json(r.trace)));
    write_file_atomic(dir / "summary.json", dump_json(run_summary(cfg, r, seed)));
}

inline void write_emulation_outputs(const std::filesystem::path& dir, const RunConfig& cfg,
                                    const EmulationResult& r, std::uint64_t seed) {
    write_training_outputs(dir, cfg, r, seed);
    nlohmann::json sites = nlohmann::json::array();
    for (int i = 0; i < kSiteCount; ++i) {
        const auto u = static_cast<std::size_t>(i);
        const auto& p = r.site_params[u];
        const auto& roi = r.rois[u];
        sites.push_back({{"site", i},
                         {"role", i == kThresholdSite ? "threshold" : "weight"},
                         {"dead_zone_pulses", p.dead_zone_pulses},
                         {"saturation_pulses", p.saturation_pulses},
                         {"background_gain", p.background_gain},
                         {"roi", {roi.x, roi.y, roi.width, roi.height}}});
    }
    nlohmann::json rig = {{"sites", sites},
                          {"final_state", r.final_state},
                          {"site_reads", r.site_reads},
                          {"stage_moves", r.sequencing.stage_moves},
                          {"probe_insertions", r.sequencing.probe_insertions},
                          {"pump_shutter_openings", r.sequencing.pump_shutter_openings}};
    write_file_atomic(dir / "rig.json", dump_json(rig));
    if (!r.snapshots.empty()) {
        nlohmann::json snaps = nlohmann::json::array();
        for (const auto& [step, state] : r.snapshots) {
            nlohmann::json s = state;
            s["step"] = step;
            snaps.push_back(std::move(s));
        }
        write_file_atomic(dir / "weight_states.json", dump_json(snaps));
    }
    for (const auto& [name, frame] : r.frames) {
        write_file_atomic(dir / "frames" / (name + ".pgm"), frame_pgm(frame));
        write_file_atomic(dir / "frames" / (name + ".json"),
                          dump_json(frame_sidecar(frame, cfg.camera, cfg.optics)));
    }
}

inline std::string energy_spots_csv(const RunConfig& cfg) {
    std::string out = csv_preamble("energy_spots");
    out += "spot_diameter_um,energy_per_pulse_pj\n";
    for (double d : cfg.energy.spot_diameters_um) {
        SpotGeometry spot;
        spot.diameter_um = d;
        out += fmt::format("{},{}\n", d, energy_per_pulse(cfg.energy_beam(), spot) * 1e12);
    }
    return out;
}

inline double median_steps(std::span<const SweepRow> rows) {
    std::vector<long> steps;
    for (const auto& r : rows)
        if (r.converged) steps.push_back(r.steps);
    if (steps.empty()) return 0.0;
    std::sort(steps.begin(), steps.end());
    const std::size_t n = steps.size();
    return n % 2 == 1 ? static_cast<double>(steps[n / 2])
                      : 0.5 * static_cast<double>(steps[n / 2 - 1] + steps[n / 2]);
}

} // namespace detail

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

/// Executes the configured mode. Returns the process exit status; a run
/// that does not converge still succeeds.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        cfg.validate();
        const Bitmaps bitmaps = load_bitmaps(cfg);
        const std::filesystem::path dir = cfg.output.dir;
        write_file_atomic(dir / "config.resolved.txt", to_text(cfg));
        switch (cfg.mode) {
        case Mode::Dataset: {
            const auto ds = build_dataset(bitmaps, cfg.trainer.target_class);
            write_file_atomic(dir / "dataset.csv", dataset_csv(ds));
            out << fmt::format("dataset: {} patterns ({} training, {} test)\n",
                               ds.training.size() + ds.testing.size(), ds.training.size(), ds.testing.size());
            break;
        }
        case Mode::Simulate: {
            const auto r = run_simulation(cfg, cfg.seed, bitmaps);
            detail::write_training_outputs(dir, cfg, r, cfg.seed);
            const auto& s = r.trace.summary;
            out << fmt::format("simulate seed={} converged={} steps={} raises={} test={}/{}\n", cfg.seed,
                               s.converged, s.total_steps, s.threshold_raises, r.test_correct(), r.test.size());
            break;
        }
        case Mode::Emulate: {
            EmulationOptions opts;
            opts.snapshots = cfg.output.verbose;
            opts.frame_interval = cfg.output.frames ? cfg.output.frame_interval : 0;
            const auto r = run_emulation(cfg, cfg.seed, bitmaps, opts);
            detail::write_emulation_outputs(dir, cfg, r, cfg.seed);
            const auto& s = r.trace.summary;
            out << fmt::format("emulate seed={} converged={} steps={} raises={} test={}/{} clamps={}\n", cfg.seed,
                               s.converged, s.total_steps, s.threshold_raises, r.test_correct(), r.test.size(),
                               r.final_state.clamps.total());
            break;
        }
        case Mode::Energy: {
            const auto r = run_emulation(cfg, cfg.seed, bitmaps);
            const auto ledger = account_run(r.trace, cfg.ledger_config());
            write_file_atomic(dir / "ledger.json", dump_json(ledger));
            write_file_atomic(dir / "ledger.txt", ledger.summary_line() + "\n");
            write_file_atomic(dir / "energy_spots.csv", detail::energy_spots_csv(cfg));
            out << ledger.summary_line() << '\n';
            break;
        }
        case Mode::Sweep: {
            const auto rows = run_sweep(cfg, bitmaps);
            write_file_atomic(dir / "sweep.csv", sweep_csv(rows, mode_name(cfg.sweep.mode)));
            const auto converged = std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.converged; });
            out << fmt::format("sweep mode={} seeds={} converged={} median_steps={}\n", mode_name(cfg.sweep.mode),
                               rows.size(), converged, detail::median_steps(rows));
            break;
        }
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitOk;
}

} // namespace optomag
