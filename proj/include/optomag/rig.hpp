#pragma once

// Hardware emulation: nine weight sites and one threshold site on a
// simulated CoPt film, written by shutter-gated pulse packets and read
// through the Faraday camera chain.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optomag/error.hpp"
#include "optomag/optics.hpp"
#include "optomag/pattern_bank.hpp"
#include "optomag/random.hpp"
#include "optomag/shutter.hpp"
#include "optomag/synapse.hpp"
#include "optomag/trainer.hpp"
#include "optomag/weight_engine.hpp"

namespace optomag {

inline constexpr int kThresholdSite = static_cast<int>(kInputs);
inline constexpr int kSiteCount = kThresholdSite + 1;

struct SynapseConfig {
    InhomogeneityParams nominal{};
    double spread = 0.1;
    ResponseCurve curve{};
};

struct RigConfig {
    double spot_diameter_um = 24.0;
    double site_pitch_um = 36.0;
    double grid_origin_x_um = 25.0;
    double grid_origin_y_um = 25.0;
    double threshold_x_um = 140.0;
    double threshold_y_um = 61.0;
    double roi_width_um = 16.5;
    double roi_height_um = 15.5;
    int init_weight_packets = 50;
    int threshold_packets = 250;
    int learning_packets = 2;
    int frames_per_read = 10;
    bool reread_threshold = false;
    std::string write_handedness = "right"; ///< label for Helicity::Write

    void validate() const {
        if (!(spot_diameter_um > 0.0)) throw ConfigError("rig.spot_diameter_um must be positive");
        if (!(site_pitch_um > 0.0)) throw ConfigError("rig.site_pitch_um must be positive");
        if (!(roi_width_um > 0.0) || !(roi_height_um > 0.0)) throw ConfigError("rig ROI size must be positive");
        if (init_weight_packets < 0 || threshold_packets < 0)
            throw ConfigError("rig initialization packet counts must be >= 0");
        if (learning_packets < 1) throw ConfigError("rig.learning_packets must be >= 1");
        if (frames_per_read < 1) throw ConfigError("rig.frames_per_read must be >= 1");
        if (write_handedness != "right" && write_handedness != "left")
            throw ConfigError("rig.write_handedness must be right or left");
    }
};

/// Zero-cost apparatus steps, counted for the trace.
struct SequencingCounters {
    long stage_moves = 0;
    long probe_insertions = 0;
    long pump_shutter_openings = 0;
};

class EmulatedRig {
public:
    EmulatedRig(RigConfig rig, SynapseConfig synapse, OpticalConstants optics, CameraConfig camera,
                ShutterModel shutter, std::uint64_t seed,
                std::optional<std::vector<InhomogeneityParams>> site_params = std::nullopt)
        : rig_(std::move(rig)), optics_(optics), camera_(camera), shutter_(shutter),
          shutter_rng_(make_stream(seed, Stream::Shutter)), noise_rng_(make_stream(seed, Stream::Noise)),
          render_rng_(make_stream(seed, Stream::Render)) {
        rig_.validate();
        optics_.validate();
        camera_.validate();
        shutter_.validate();
        params_ = site_params ? *site_params : sample_sites(seed, kSiteCount, synapse.spread, synapse.nominal);
        if (params_.size() != static_cast<std::size_t>(kSiteCount))
            throw ConfigError("rig needs exactly 10 site parameter sets");
        for (int i = 0; i < kSiteCount; ++i) {
            sites_[static_cast<std::size_t>(i)] = SynapseSite(params_[static_cast<std::size_t>(i)], synapse.curve);
            SpotGeometry spot;
            spot.diameter_um = rig_.spot_diameter_um;
            if (i == kThresholdSite) {
                spot.center_x_um = rig_.threshold_x_um;
                spot.center_y_um = rig_.threshold_y_um;
            } else {
                spot.center_x_um = rig_.grid_origin_x_um + rig_.site_pitch_um * (i % 3);
                spot.center_y_um = rig_.grid_origin_y_um + rig_.site_pitch_um * (i / 3);
            }
            spots_[static_cast<std::size_t>(i)] = spot;
            rois_[static_cast<std::size_t>(i)] = roi_for_spot(spot, camera_, rig_.roi_width_um, rig_.roi_height_um);
            if (!inside(rois_[static_cast<std::size_t>(i)], full_sensor(camera_)))
                throw ConfigError("site ROI falls outside the camera window");
        }
        // Validates spot placement against the field of view once up front.
        Engine probe_rng(0);
        CameraConfig dry = camera_;
        dry.read_noise_counts = 0.0;
        (void)expose_frame(illuminated(), optics_, dry, probe_rng, Window{0, 0, 1, 1});
    }

    /// Dark reference and background I_B of every site, cached until the
    /// next explicit call.
    void capture_backgrounds() {
        for (int i = 0; i < kSiteCount; ++i) {
            const auto u = static_cast<std::size_t>(i);
            dark_sums_[u] = integrate_site(i, /*probe_on=*/false);
            const double background = integrate_site(i, /*probe_on=*/true) - dark_sums_[u];
            require_background(background);
            ++reads_;
            if (i == kThresholdSite)
                state_.threshold_background = background;
            else
                state_.background_sums[u] = background;
        }
        backgrounds_captured_ = true;
    }

    /// Writes the initial pre-weights and threshold, then reads all sites.
    WeightState initialize_network() {
        if (!backgrounds_captured_) capture_backgrounds();
        for (int i = 0; i < kSiteCount; ++i) {
            const int packets = i == kThresholdSite ? rig_.threshold_packets : rig_.init_weight_packets;
            if (packets == 0) continue;
            const long pulses = deliver(i, Helicity::Write, packets);
            init_updates_.push_back({i, pulses, Helicity::Write});
        }
        std::vector<int> all(kSiteCount);
        for (int i = 0; i < kSiteCount; ++i) all[static_cast<std::size_t>(i)] = i;
        (void)read_sites(all);
        return state_;
    }

    /// Each listed site receives the learning packets with the helicity of
    /// the requested direction; others are untouched.
    std::vector<SiteUpdate> apply_learning_update(std::span<const int> site_indices, Decision direction) {
        if (direction == Decision::Accept) throw UsageError("learning update needs a direction");
        const auto helicity = direction == Decision::RaiseOutput ? Helicity::Write : Helicity::Erase;
        std::vector<SiteUpdate> out;
        out.reserve(site_indices.size());
        for (int i : site_indices) {
            check_site(i);
            out.push_back({i, deliver(i, helicity, rig_.learning_packets), helicity});
        }
        return out;
    }

    /// Raw (not dark-corrected) averaged ROI sums of the listed sites; the
    /// cached weight state is refreshed from them.
    std::vector<double> read_sites(std::span<const int> site_indices) {
        if (!backgrounds_captured_) throw UsageError("backgrounds must be captured before reading");
        std::vector<double> raw;
        raw.reserve(site_indices.size());
        for (int i : site_indices) {
            check_site(i);
            const auto u = static_cast<std::size_t>(i);
            const double sum = integrate_site(i, true);
            raw.push_back(sum);
            ++reads_;
            const double written = sum - dark_sums_[u];
            if (i == kThresholdSite) {
                state_.threshold_written = written;
                state_.threshold = extract_threshold(state_.threshold_background, written);
            } else {
                state_.written_sums[u] = written;
                state_.weights[u] = extract_weight(state_.background_sums[u], written, &state_.clamps);
            }
        }
        return raw;
    }

    // WeightBackend interface.

    double output(const Pattern& p) const {
        double o = 0.0;
        for (std::size_t i = 0; i < kInputs; ++i) {
            const double background = state_.background_sums[i];
            const double written = background * (1.0 - state_.weights[i]);
            o += gated_contribution(p.inputs[i], background, written);
        }
        return o;
    }

    double threshold() const { return state_.threshold * threshold_scale_; }
    WeightVector weights() const { return state_.contributions(); }

    UpdateOutcome apply_update(const Pattern& p, Decision direction) {
        std::vector<int> active;
        for (std::size_t i = 0; i < kInputs; ++i)
            if (p.inputs[i] != 0) active.push_back(static_cast<int>(i));
        UpdateOutcome out;
        out.updates = apply_learning_update(active, direction);
        if (rig_.reread_threshold) active.push_back(kThresholdSite);
        (void)read_sites(active);
        out.site_reads = static_cast<int>(active.size());
        return out;
    }

    void raise_threshold(double fraction) { threshold_scale_ *= 1.0 + fraction; }

    /// Erases every site and rewrites the initial state; backgrounds stay cached.
    void reset() {
        for (auto& s : sites_) s.saturate(SaturationDirection::Background);
        (void)initialize_network();
    }

    /// Full-sensor render of the current film state (for image dumps). Uses
    /// its own noise stream, so dumping frames leaves the run unchanged.
    Frame render(bool probe_on = true) {
        CameraConfig cam = camera_;
        if (!probe_on) cam.exposure_time_s = 0.0;
        return expose_frame(illuminated(), optics_, cam, render_rng_);
    }

    const WeightState& state() const { return state_; }
    const std::vector<InhomogeneityParams>& site_params() const { return params_; }
    const SynapseSite& site(int i) const { return sites_.at(static_cast<std::size_t>(i)); }
    const std::array<SpotGeometry, kSiteCount>& spots() const { return spots_; }
    const std::array<Roi, kSiteCount>& rois() const { return rois_; }
    const std::vector<SiteUpdate>& init_updates() const { return init_updates_; }
    long site_reads() const { return reads_; }
    const SequencingCounters& sequencing() const { return seq_; }
    const CameraConfig& camera() const { return camera_; }
    const RigConfig& config() const { return rig_; }

    /// Normalization that puts count-scale weights on the dimensionless scale.
    double normalization_scale() const { return state_.mean_background(); }

private:
    static void check_site(int i) {
        if (i < 0 || i >= kSiteCount) throw UsageError("site index out of range");
    }

    std::vector<IlluminatedSite> illuminated() const {
        std::vector<IlluminatedSite> out;
        out.reserve(kSiteCount);
        for (int i = 0; i < kSiteCount; ++i)
            out.push_back(IlluminatedSite::of(sites_[static_cast<std::size_t>(i)], spots_[static_cast<std::size_t>(i)]));
        return out;
    }

    long deliver(int i, Helicity helicity, int packets) {
        ++seq_.stage_moves;
        long total = 0;
        for (int k = 0; k < packets; ++k) {
            const long pulses = shutter_event(shutter_rng_, shutter_);
            sites_[static_cast<std::size_t>(i)].apply_packet(helicity, pulses);
            total += pulses;
            ++seq_.pump_shutter_openings;
        }
        return total;
    }

    /// Averaged ROI sum over frames_per_read snapshots of one site.
    double integrate_site(int i, bool probe_on) {
        ++seq_.stage_moves;
        if (probe_on) ++seq_.probe_insertions;
        CameraConfig cam = camera_;
        if (!probe_on) cam.exposure_time_s = 0.0;
        const Roi roi = rois_[static_cast<std::size_t>(i)];
        const auto lit = illuminated();
        std::vector<Frame> frames;
        frames.reserve(static_cast<std::size_t>(rig_.frames_per_read));
        for (int k = 0; k < rig_.frames_per_read; ++k)
            frames.push_back(expose_frame(lit, optics_, cam, noise_rng_, roi));
        return integrate_roi(average_frames(frames), roi);
    }

    RigConfig rig_;
    OpticalConstants optics_;
    CameraConfig camera_;
    ShutterModel shutter_;
    Engine shutter_rng_;
    Engine noise_rng_;
    Engine render_rng_;
    std::vector<InhomogeneityParams> params_;
    std::array<SynapseSite, kSiteCount> sites_{};
    std::array<SpotGeometry, kSiteCount> spots_{};
    std::array<Roi, kSiteCount> rois_{};
    std::array<double, kSiteCount> dark_sums_{};
    WeightState state_{};
    double threshold_scale_ = 1.0;
    bool backgrounds_captured_ = false;
    std::vector<SiteUpdate> init_updates_;
    long reads_ = 0;
    SequencingCounters seq_{};
};

static_assert(WeightBackend<EmulatedRig>);

} // namespace optomag
