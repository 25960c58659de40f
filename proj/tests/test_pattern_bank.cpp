#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "optomag/pattern_bank.hpp"

using namespace optomag;

TEST(PatternBank, DefaultBitmapsFlattenRowMajor) {
    const auto b = Bitmaps::defaults();
    EXPECT_EQ(flatten(b.z), (Inputs{1, 1, 0, 0, 1, 0, 0, 1, 1}));
    EXPECT_EQ(flatten(b.v), (Inputs{1, 0, 1, 1, 0, 1, 0, 1, 0}));
    EXPECT_EQ(flatten(b.n), (Inputs{0, 1, 0, 1, 0, 1, 1, 0, 1}));
}

TEST(PatternBank, UnflattenInvertsFlatten) {
    for (auto cls : kClasses) {
        const auto& grid = Bitmaps::defaults().of(cls);
        EXPECT_EQ(unflatten(flatten(grid)), grid);
    }
}

TEST(PatternBank, IdealPatternsAreDistinct) {
    const auto ideals = ideal_patterns(Bitmaps::defaults());
    EXPECT_GT(hamming(ideals[0].inputs, ideals[1].inputs), 0);
    EXPECT_GT(hamming(ideals[1].inputs, ideals[2].inputs), 0);
    EXPECT_GT(hamming(ideals[0].inputs, ideals[2].inputs), 0);
}

TEST(PatternBank, VariantsFlipExactlyOneNonFirstInput) {
    for (const auto& ideal : ideal_patterns(Bitmaps::defaults())) {
        const auto vs = generate_variants(ideal);
        ASSERT_EQ(vs.size(), 8U);
        std::set<Inputs> distinct;
        for (const auto& v : vs) {
            EXPECT_EQ(hamming(v.inputs, ideal.inputs), 1) << v.id();
            // Brute-force locate the flipped index.
            int flipped = -1;
            for (int i = 0; i < 9; ++i)
                if (v.inputs[static_cast<std::size_t>(i)] != ideal.inputs[static_cast<std::size_t>(i)]) flipped = i;
            EXPECT_EQ(flipped, v.variant);
            EXPECT_NE(flipped, 0);
            EXPECT_EQ(v.role, v.variant == 1 ? Role::Test : Role::Train);
            distinct.insert(v.inputs);
        }
        EXPECT_EQ(distinct.size(), 8U);
    }
}

TEST(PatternBank, VariantsRejectNonIdealInput) {
    Pattern p = ideal_patterns(Bitmaps::defaults())[0];
    p.variant = 3;
    EXPECT_THROW(generate_variants(p), UsageError);
}

TEST(PatternBank, DatasetHasTwentySevenPatterns) {
    const auto ds = build_dataset(Bitmaps::defaults());
    EXPECT_EQ(ds.training.size(), 24U);
    EXPECT_EQ(ds.testing.size(), 3U);
    EXPECT_EQ(ds.desired_above, PatternClass::V);
    for (const auto& t : ds.testing) EXPECT_EQ(t.variant, 1);
    std::set<std::string> ids;
    for (const auto& p : ds.training) ids.insert(p.id());
    for (const auto& p : ds.testing) ids.insert(p.id());
    EXPECT_EQ(ids.size(), 27U);
}

TEST(PatternBank, TrainingIsClassBlocked) {
    const auto ds = build_dataset(Bitmaps::defaults());
    for (std::size_t i = 0; i < ds.training.size(); ++i)
        EXPECT_EQ(ds.training[i].cls, kClasses[i / 8]) << i;
    EXPECT_EQ(ds.training[0].variant, 0);
    EXPECT_EQ(ds.training[1].variant, 2);
}

TEST(PatternBank, BarOrderPutsTestAfterEachClassBlock) {
    const auto bars = bar_order(build_dataset(Bitmaps::defaults()));
    ASSERT_EQ(bars.size(), 27U);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(bars[k * 9 + 8].role, Role::Test);
        for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(bars[k * 9 + i].role, Role::Train);
        for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(bars[k * 9 + i].cls, kClasses[k]);
    }
}

TEST(PatternBank, ParseBitmapsRoundTrip) {
    const auto b = Bitmaps::defaults();
    std::istringstream in(format_bitmaps(b));
    EXPECT_EQ(parse_bitmaps(in), b);
}

TEST(PatternBank, ParseBitmapsReportsLine) {
    std::istringstream in("110\n010\n011\n\n101\n1x1\n010\n");
    try {
        parse_bitmaps(in, "letters.txt");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("letters.txt:6:"), std::string::npos) << e.what();
    }
}

TEST(PatternBank, ParseBitmapsRejectsWrongShapes) {
    auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return parse_bitmaps(in);
    };
    EXPECT_THROW(parse("110\n010\n"), ConfigError);                       // truncated block
    EXPECT_THROW(parse("1100\n010\n011\n"), ConfigError);                 // wide row
    EXPECT_THROW(parse("110\n010\n011\n\n101\n101\n010\n"), ConfigError); // two blocks
    EXPECT_THROW(parse("110\n010\n\n011\n"), ConfigError);                // blank inside block
}

TEST(PatternBank, BitmapFromGridValidates) {
    EXPECT_NO_THROW(bitmap_from_grid({{1, 0, 1}, {0, 1, 0}, {1, 1, 1}}));
    EXPECT_THROW(bitmap_from_grid({{1, 0, 1}, {0, 1, 0}}), ConfigError);
    EXPECT_THROW(bitmap_from_grid({{1, 0, 2}, {0, 1, 0}, {1, 1, 1}}), ConfigError);
    EXPECT_THROW(bitmap_from_grid({{1, 0}, {0, 1, 0}, {1, 1, 1}}), ConfigError);
}

TEST(PatternBank, ParseClass) {
    EXPECT_EQ(parse_class("v"), PatternClass::V);
    EXPECT_EQ(parse_class("N"), PatternClass::N);
    EXPECT_THROW(parse_class("x"), ConfigError);
}
