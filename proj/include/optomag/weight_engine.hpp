#pragma once

// Background-referenced weight encoding: w = (I_B - I_W) / I_B, and the
// B-W / B-B input gate.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include <json.hpp>

#include "optomag/error.hpp"
#include "optomag/pattern_bank.hpp"

namespace optomag {

struct ClampDiagnostics {
    std::size_t below_zero = 0;
    std::size_t above_one = 0;

    std::size_t total() const { return below_zero + above_one; }
};

inline void require_background(double background_sum) {
    if (!(background_sum > 0.0) || !std::isfinite(background_sum))
        throw DegenerateBackgroundError("background ROI sum is not positive (dead ROI)");
}

/// Unclamped (I_B - I_W) / I_B.
inline double raw_weight(double background_sum, double written_sum) {
    require_background(background_sum);
    return (background_sum - written_sum) / background_sum;
}

inline double extract_weight(double background_sum, double written_sum,
                             ClampDiagnostics* diagnostics = nullptr) {
    const double w = raw_weight(background_sum, written_sum);
    if (diagnostics != nullptr) {
        if (w < 0.0) ++diagnostics->below_zero;
        if (w > 1.0) ++diagnostics->above_one;
    }
    return std::clamp(w, 0.0, 1.0);
}

/// State 1 subtracts the written image from the background (B - W); state 0
/// subtracts the background from itself (B - B).
inline double gated_contribution(int input_bit, double background_sum, double written_sum) {
    if (input_bit != 0 && input_bit != 1) throw UsageError("input bit must be 0 or 1");
    require_background(background_sum);
    return input_bit == 1 ? background_sum - written_sum : background_sum - background_sum;
}

inline double extract_threshold(double background_sum, double written_sum) {
    require_background(background_sum);
    return background_sum - written_sum;
}

struct WeightState {
    std::array<double, kInputs> background_sums{}; ///< dark-corrected I_B
    std::array<double, kInputs> written_sums{};    ///< dark-corrected I_W
    std::array<double, kInputs> weights{};         ///< clamped w_is
    double threshold_background = 0.0;
    double threshold_written = 0.0;
    double threshold = 0.0;                        ///< count scale
    ClampDiagnostics clamps;

    /// Count-scale weights I_B * w_is as seen by the trainer.
    std::array<double, kInputs> contributions() const {
        std::array<double, kInputs> out{};
        for (std::size_t i = 0; i < kInputs; ++i) out[i] = background_sums[i] * weights[i];
        return out;
    }

    double mean_background() const {
        double s = 0.0;
        for (double b : background_sums) s += b;
        return s / static_cast<double>(kInputs);
    }
};

inline void to_json(nlohmann::json& j, const WeightState& s) {
    j = nlohmann::json{
        {"background_sums", s.background_sums},
        {"written_sums", s.written_sums},
        {"weights", s.weights},
        {"threshold_background", s.threshold_background},
        {"threshold_written", s.threshold_written},
        {"threshold", s.threshold},
        {"clamped_below_zero", s.clamps.below_zero},
        {"clamped_above_one", s.clamps.above_one},
    };
}

} // namespace optomag
