#include <vector>

#include <gtest/gtest.h>

#include "optomag/rig.hpp"

using namespace optomag;

namespace {

CameraConfig quiet() {
    CameraConfig cam;
    cam.read_noise_counts = 0.0;
    return cam;
}

ShutterModel fixed_shutter() {
    ShutterModel s;
    s.mode = JitterMode::Fixed;
    return s;
}

SynapseConfig uniform_synapse(InhomogeneityParams nominal = {}, CurveShape shape = CurveShape::Smoothstep) {
    SynapseConfig s;
    s.nominal = nominal;
    s.spread = 0.0;
    s.curve.shape = shape;
    return s;
}

EmulatedRig make(RigConfig rig = {}, SynapseConfig syn = uniform_synapse(), ShutterModel sh = fixed_shutter(),
                 CameraConfig cam = quiet(), std::uint64_t seed = 1) {
    return EmulatedRig(rig, syn, OpticalConstants{}, cam, sh, seed);
}

} // namespace

TEST(Rig, LayoutFitsSensor) {
    auto rig = make();
    for (const auto& roi : rig.rois()) {
        EXPECT_TRUE(inside(roi, full_sensor(rig.camera())));
        EXPECT_EQ(roi.width, 33);
        EXPECT_EQ(roi.height, 31);
    }
    // Distinct, non-overlapping ROIs.
    for (int i = 0; i < kSiteCount; ++i)
        for (int j = i + 1; j < kSiteCount; ++j) {
            const auto& a = rig.rois()[static_cast<std::size_t>(i)];
            const auto& b = rig.rois()[static_cast<std::size_t>(j)];
            const bool disjoint = a.x + a.width <= b.x || b.x + b.width <= a.x || a.y + a.height <= b.y ||
                                  b.y + b.height <= a.y;
            EXPECT_TRUE(disjoint) << i << " " << j;
        }
}

TEST(Rig, RejectsSpotsOutsideField) {
    RigConfig cfg;
    cfg.threshold_x_um = 500.0;
    EXPECT_THROW(make(cfg), ConfigError);
}

TEST(Rig, InitSaturatesWeightSitesWithNominalCurve) {
    auto rig = make();
    const auto state = rig.initialize_network();
    for (int i = 0; i < kSiteCount; ++i) EXPECT_EQ(rig.site(i).written_fraction(), 1.0) << i;
    for (double w : state.weights) EXPECT_EQ(w, 1.0);
    EXPECT_EQ(state.threshold, state.threshold_background);
    EXPECT_EQ(rig.init_updates().size(), 10U);
    EXPECT_EQ(rig.init_updates()[0].pulses, 2500);
    EXPECT_EQ(rig.init_updates()[9].pulses, 12500);
}

TEST(Rig, ZeroInitPacketsLeaveWeightsAtZero) {
    RigConfig cfg;
    cfg.init_weight_packets = 0;
    cfg.threshold_packets = 0;
    auto rig = make(cfg);
    const auto state = rig.initialize_network();
    for (double w : state.weights) EXPECT_EQ(w, 0.0);
    EXPECT_EQ(state.threshold, 0.0);
    EXPECT_TRUE(rig.init_updates().empty());
}

TEST(Rig, ThresholdToWeightRatioInLinearRegion) {
    auto rig = make(RigConfig{}, uniform_synapse(InhomogeneityParams{1, 20001, 1.0}, CurveShape::Linear));
    const auto state = rig.initialize_network();
    const double ratio = state.threshold / (state.background_sums[0] * state.weights[0]);
    EXPECT_NEAR(ratio, 5.0, 0.05);
}

TEST(Rig, BackgroundOfUnwrittenSiteEqualsWritten) {
    auto rig = make();
    rig.capture_backgrounds();
    const std::vector<int> all{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    rig.read_sites(all);
    for (std::size_t i = 0; i < kInputs; ++i) {
        EXPECT_EQ(rig.state().written_sums[i], rig.state().background_sums[i]);
        EXPECT_EQ(rig.state().weights[i], 0.0);
    }
}

TEST(Rig, FullyWrittenRawSumIsDarkTimesPixels) {
    auto rig = make();
    rig.initialize_network();
    const std::vector<int> one{4};
    const auto raw = rig.read_sites(one);
    const auto& roi = rig.rois()[4];
    EXPECT_EQ(raw[0], rig.camera().dark_offset * roi.width * roi.height);
    EXPECT_EQ(rig.read_sites(one), raw); // pure without writes
}

TEST(Rig, LearningUpdateFollowsCurve) {
    RigConfig cfg;
    cfg.init_weight_packets = 6; // 300 pulses, mid-curve
    auto rig = make(cfg);
    rig.initialize_network();
    const long before = rig.site(3).exposure();
    const double m0 = rig.site(3).written_fraction();
    const std::vector<int> site{3};
    const auto ups = rig.apply_learning_update(site, Decision::RaiseOutput);
    ASSERT_EQ(ups.size(), 1U);
    EXPECT_EQ(ups[0].pulses, 100);
    EXPECT_EQ(ups[0].helicity, Helicity::Write);
    const InhomogeneityParams p;
    EXPECT_DOUBLE_EQ(rig.site(3).written_fraction() - m0,
                     response_curve(before + 100, p) - response_curve(before, p));
    rig.apply_learning_update(site, Decision::LowerOutput);
    EXPECT_EQ(rig.site(3).exposure(), before);
    EXPECT_EQ(rig.site(3).written_fraction(), m0);
}

TEST(Rig, EmptyUpdateChangesNothing) {
    auto rig = make();
    rig.initialize_network();
    const long before = rig.sequencing().pump_shutter_openings;
    EXPECT_TRUE(rig.apply_learning_update(std::vector<int>{}, Decision::RaiseOutput).empty());
    EXPECT_EQ(rig.sequencing().pump_shutter_openings, before);
    EXPECT_THROW(rig.apply_learning_update(std::vector<int>{0}, Decision::Accept), UsageError);
    EXPECT_THROW(rig.apply_learning_update(std::vector<int>{10}, Decision::RaiseOutput), UsageError);
}

TEST(Rig, OutputIsSumOfActiveContributions) {
    RigConfig cfg;
    cfg.init_weight_packets = 7;
    auto rig = make(cfg, uniform_synapse(), ShutterModel{});
    rig.initialize_network();
    const auto ds = build_dataset(Bitmaps::defaults());
    for (const auto& p : ds.training) EXPECT_NEAR(rig.output(p), pattern_output(rig.weights(), p), 1e-6);
}

TEST(Rig, ApplyUpdateReadsActiveSitesAndOptionallyThreshold) {
    for (bool reread : {false, true}) {
        RigConfig cfg;
        cfg.reread_threshold = reread;
        auto rig = make(cfg);
        rig.initialize_network();
        const long reads = rig.site_reads();
        const auto p = build_dataset(Bitmaps::defaults()).training[0];
        const auto out = rig.apply_update(p, Decision::LowerOutput);
        EXPECT_EQ(out.site_reads, p.active_count() + (reread ? 1 : 0));
        EXPECT_EQ(rig.site_reads() - reads, out.site_reads);
        EXPECT_EQ(out.updates.size(), static_cast<std::size_t>(p.active_count()));
    }
}

TEST(Rig, RaiseScalesThresholdAndResetRestoresInit) {
    auto rig = make();
    rig.initialize_network();
    const double b = rig.threshold();
    const auto w = rig.weights();
    rig.raise_threshold(0.05);
    EXPECT_DOUBLE_EQ(rig.threshold(), b * 1.05);
    const auto p = build_dataset(Bitmaps::defaults()).training[0];
    for (int i = 0; i < 10; ++i) rig.apply_update(p, Decision::LowerOutput);
    rig.reset();
    EXPECT_EQ(rig.weights(), w);
}

TEST(Rig, ReadsBeforeBackgroundThrow) {
    auto rig = make();
    EXPECT_THROW(rig.read_sites(std::vector<int>{0}), UsageError);
}

TEST(Rig, SameSeedSameRun) {
    const auto ds = build_dataset(Bitmaps::defaults());
    TrainerConfig tc;
    tc.max_epochs = 60;
    CameraConfig noisy;
    noisy.read_noise_counts = 100.0;
    auto a = make(RigConfig{}, SynapseConfig{}, ShutterModel{}, noisy, 9);
    auto b = make(RigConfig{}, SynapseConfig{}, ShutterModel{}, noisy, 9);
    a.initialize_network();
    b.initialize_network();
    const auto ta = train(ds, tc, a);
    const auto tb = train(ds, tc, b);
    ASSERT_EQ(ta.steps.size(), tb.steps.size());
    for (std::size_t i = 0; i < ta.steps.size(); ++i) ASSERT_EQ(ta.steps[i].output, tb.steps[i].output);
}

TEST(Rig, DefaultEmulationConverges) {
    const auto ds = build_dataset(Bitmaps::defaults());
    TrainerConfig tc;
    auto rig = EmulatedRig(RigConfig{}, SynapseConfig{}, OpticalConstants{}, CameraConfig{}, ShutterModel{}, 7);
    rig.initialize_network();
    const auto trace = train(ds, tc, rig);
    EXPECT_TRUE(trace.summary.converged);
    EXPECT_TRUE(all_non_negative(trace.summary.final_weights));
}
