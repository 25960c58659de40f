#include <gtest/gtest.h>

#include "optomag/weight_engine.hpp"

using namespace optomag;

TEST(ExtractWeight, Examples) {
    EXPECT_EQ(extract_weight(1000.0, 1000.0), 0.0);
    EXPECT_EQ(extract_weight(1000.0, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(extract_weight(1000.0, 600.0), 0.4);
}

TEST(ExtractWeight, ClampsAndCounts) {
    ClampDiagnostics diag;
    EXPECT_EQ(extract_weight(1000.0, 1010.0, &diag), 0.0); // noise above background
    EXPECT_EQ(extract_weight(1000.0, -5.0, &diag), 1.0);   // dark over-subtracted
    EXPECT_EQ(diag.below_zero, 1U);
    EXPECT_EQ(diag.above_one, 1U);
    EXPECT_EQ(diag.total(), 2U);
    EXPECT_DOUBLE_EQ(raw_weight(1000.0, 1010.0), -0.01);
}

TEST(ExtractWeight, DeadBackgroundThrows) {
    EXPECT_THROW(extract_weight(0.0, 0.0), DegenerateBackgroundError);
    EXPECT_THROW(extract_weight(-1.0, 0.0), DegenerateBackgroundError);
    EXPECT_THROW(gated_contribution(1, 0.0, 0.0), DegenerateBackgroundError);
    EXPECT_THROW(extract_threshold(0.0, 0.0), DegenerateBackgroundError);
}

TEST(Gate, Examples) {
    EXPECT_EQ(gated_contribution(0, 1000.0, 600.0), 0.0);
    EXPECT_EQ(gated_contribution(0, 1234.5, 17.0), 0.0);
    EXPECT_EQ(gated_contribution(1, 1000.0, 1000.0), 0.0);
    EXPECT_EQ(gated_contribution(1, 1000.0, 600.0), 400.0);
    EXPECT_THROW(gated_contribution(2, 1000.0, 600.0), UsageError);
}

TEST(Gate, EqualsBackgroundTimesWeight) {
    for (double iw : {0.0, 100.0, 555.5, 1000.0})
        EXPECT_DOUBLE_EQ(gated_contribution(1, 1000.0, iw), 1000.0 * extract_weight(1000.0, iw));
}

TEST(Threshold, Examples) {
    EXPECT_EQ(extract_threshold(5000.0, 5000.0), 0.0);
    EXPECT_EQ(extract_threshold(5000.0, 0.0), 5000.0);
}

TEST(WeightState, ContributionsAndSerialization) {
    WeightState s;
    s.background_sums.fill(1000.0);
    s.weights.fill(0.25);
    s.threshold = 1250.0;
    for (double c : s.contributions()) EXPECT_EQ(c, 250.0);
    EXPECT_EQ(s.mean_background(), 1000.0);
    const nlohmann::json j = s;
    EXPECT_EQ(j.at("weights").size(), 9U);
    EXPECT_EQ(j.at("threshold").get<double>(), 1250.0);
    EXPECT_EQ(j.at("clamped_below_zero").get<int>(), 0);
}
