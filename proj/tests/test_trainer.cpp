#include <algorithm>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "optomag/pattern_bank.hpp"
#include "optomag/shutter.hpp"
#include "optomag/trainer.hpp"

using namespace optomag;

namespace {

Pattern with_inputs(Inputs in, PatternClass cls = PatternClass::V) {
    Pattern p;
    p.inputs = in;
    p.cls = cls;
    return p;
}

} // namespace

TEST(Output, Examples) {
    WeightVector half;
    half.fill(0.5);
    EXPECT_EQ(pattern_output(half, with_inputs({})), 0.0);
    EXPECT_EQ(pattern_output(half, with_inputs({1, 0, 1, 1, 0, 0, 0, 1, 0})), 2.0);
    WeightVector basis{};
    basis[0] = 1.0;
    EXPECT_EQ(pattern_output(basis, with_inputs({1, 1, 1, 1, 1, 1, 1, 1, 1})), 1.0);
    const std::vector<double> w(3, 1.0);
    const std::vector<std::uint8_t> x(4, 1);
    EXPECT_THROW(pattern_output(w, x), UsageError);
}

TEST(Classify, StrictThreshold) {
    const double b = 2.5;
    EXPECT_EQ(classify(b + 1e-9, b, PatternClass::V, PatternClass::V), Decision::Accept);
    EXPECT_EQ(classify(b + 1e-9, b, PatternClass::Z, PatternClass::V), Decision::LowerOutput);
    EXPECT_EQ(classify(b - 1e-9, b, PatternClass::Z, PatternClass::V), Decision::Accept);
    EXPECT_EQ(classify(b - 1e-9, b, PatternClass::V, PatternClass::V), Decision::RaiseOutput);
    EXPECT_EQ(classify(b, b, PatternClass::V, PatternClass::V), Decision::RaiseOutput);
    EXPECT_EQ(classify(b, b, PatternClass::N, PatternClass::V), Decision::LowerOutput);
}

TEST(Update, Examples) {
    WeightVector w;
    w.fill(0.5);
    EXPECT_EQ(update_weights(w, with_inputs({}), Decision::RaiseOutput, 0.01), w);
    const auto up = update_weights(w, with_inputs({1}), Decision::RaiseOutput, 0.01);
    EXPECT_DOUBLE_EQ(up[0], 0.51);
    for (std::size_t i = 1; i < kInputs; ++i) EXPECT_EQ(up[i], 0.5);
    const auto p = with_inputs({1, 1, 0, 1, 0, 0, 1, 1, 1});
    // Exact for a dyadic rate; within rounding otherwise.
    const auto exact = update_weights(update_weights(w, p, Decision::RaiseOutput, 1.0 / 128.0), p,
                                      Decision::LowerOutput, 1.0 / 128.0);
    EXPECT_EQ(exact, w);
    const auto back = update_weights(update_weights(w, p, Decision::RaiseOutput, 0.0125), p,
                                     Decision::LowerOutput, 0.0125);
    for (std::size_t i = 0; i < kInputs; ++i) EXPECT_NEAR(back[i], w[i], 1e-15);
}

TEST(Update, RejectsBadArguments) {
    WeightVector w{};
    EXPECT_THROW(update_weights(w, with_inputs({1}), Decision::RaiseOutput, 0.0), UsageError);
    EXPECT_THROW(update_weights(w, with_inputs({1}), Decision::Accept, 0.01), UsageError);
}

TEST(Eta, RangeDeterminismAndMean) {
    Engine a = make_stream(5, Stream::Trainer);
    Engine b = make_stream(5, Stream::Trainer);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double e = sample_eta(a, 0.014);
        ASSERT_GT(e, 0.0);
        ASSERT_LE(e, 0.014);
        ASSERT_EQ(e, sample_eta(b, 0.014));
        sum += e;
    }
    EXPECT_NEAR(sum / n, 0.007, 0.02 * 0.007);
    EXPECT_THROW(sample_eta(a, 0.0), UsageError);
}

TEST(Train, SatisfiedDatasetIsFixedPoint) {
    // A backend whose outputs already sit on the desired side of b.
    const auto ds = build_dataset(Bitmaps::defaults());
    TrainerConfig cfg;
    struct Fixed {
        double output(const Pattern& p) const { return p.cls == PatternClass::V ? 3.0 : 1.0; }
        double threshold() const { return 2.0; }
        WeightVector weights() const { return WeightVector{}; }
        UpdateOutcome apply_update(const Pattern&, Decision) { throw UsageError("no update expected"); }
        void raise_threshold(double) {}
        void reset() {}
    } fixed;
    const auto trace = train(ds, cfg, fixed);
    EXPECT_EQ(trace.steps.size(), 24U);
    EXPECT_EQ(trace.update_count(), 0);
    EXPECT_TRUE(trace.summary.converged);
    EXPECT_EQ(trace.summary.epochs, 1);
}

TEST(Train, DefaultSeedConverges) {
    const auto ds = build_dataset(Bitmaps::defaults());
    TrainerConfig cfg;
    SimulatedWeights backend(cfg, 7);
    const auto trace = train(ds, cfg, backend);
    ASSERT_TRUE(trace.summary.converged);
    EXPECT_GE(trace.summary.total_steps, 200);
    EXPECT_LE(trace.summary.total_steps, 800);
    EXPECT_EQ(trace.summary.total_steps % 24, 0);
    EXPECT_TRUE(all_non_negative(trace.summary.final_weights));
    // The final epoch is a clean pass.
    for (std::size_t i = trace.steps.size() - 24; i < trace.steps.size(); ++i)
        EXPECT_EQ(trace.steps[i].action, Decision::Accept);
}

TEST(Train, StepRecordsAreConsistent) {
    const auto ds = build_dataset(Bitmaps::defaults());
    TrainerConfig cfg;
    SimulatedWeights backend(cfg, 3);
    const auto trace = train(ds, cfg, backend);
    WeightVector w;
    w.fill(cfg.initial_weight);
    for (const auto& s : trace.steps) {
        const auto& p = ds.training[static_cast<std::size_t>(s.pattern_index)];
        EXPECT_DOUBLE_EQ(s.output, pattern_output(w, p));
        EXPECT_EQ(s.action, classify(s.output, s.threshold, p.cls, cfg.target_class));
        if (s.action != Decision::Accept) {
            EXPECT_GT(s.eta, 0.0);
            EXPECT_LE(s.eta, cfg.eta_max);
            EXPECT_EQ(static_cast<int>(s.updates.size()), p.active_count());
            w = update_weights(w, p, s.action, s.eta);
        }
        ASSERT_EQ(s.weights, w);
    }
}

TEST(Train, RaiseIsLoggedAndResetRecovers) {
    // Weight 2 is never active in a V pattern, so it only decreases; with a
    // low initial threshold it goes negative and forces raises.
    const auto ds = build_dataset(Bitmaps::defaults());
    TrainerConfig cfg;
    cfg.initial_threshold = 1.0;
    cfg.reset_on_raise = true;
    cfg.max_epochs = 2000;
    SimulatedWeights backend(cfg, 1);
    const auto trace = train(ds, cfg, backend);
    ASSERT_TRUE(trace.summary.converged);
    EXPECT_GT(trace.summary.threshold_raises, 0);
    EXPECT_EQ(static_cast<int>(trace.summary.raise_steps.size()), trace.summary.threshold_raises);
    EXPECT_TRUE(all_non_negative(trace.summary.final_weights));
    EXPECT_NEAR(trace.summary.final_threshold, std::pow(1.05, trace.summary.threshold_raises), 1e-12);
    for (long s : trace.summary.raise_steps) EXPECT_EQ(s % 24, 0);
}

TEST(Train, UnconvergedRunStopsAtMaxEpochs) {
    const auto ds = build_dataset(Bitmaps::defaults());
    TrainerConfig cfg;
    cfg.max_epochs = 2;
    SimulatedWeights backend(cfg, 7);
    const auto trace = train(ds, cfg, backend);
    EXPECT_FALSE(trace.summary.converged);
    EXPECT_EQ(trace.summary.epochs, 2);
    EXPECT_EQ(trace.summary.total_steps, 48);
}

TEST(Train, ObserverSeesEveryStep) {
    const auto ds = build_dataset(Bitmaps::defaults());
    TrainerConfig cfg;
    SimulatedWeights backend(cfg, 7);
    long seen = 0;
    const auto trace = train(ds, cfg, backend, [&](const StepRecord& s, const SimulatedWeights& b) {
        EXPECT_EQ(s.step, ++seen);
        EXPECT_EQ(s.weights, b.weights());
    });
    EXPECT_EQ(seen, trace.summary.total_steps);
}

TEST(Test, EvaluationIsPure) {
    const auto ds = build_dataset(Bitmaps::defaults());
    TrainerConfig cfg;
    SimulatedWeights backend(cfg, 7);
    const auto trace = train(ds, cfg, backend);
    const auto& s = trace.summary;
    const auto a = evaluate_test(s.final_weights, s.final_threshold, ds.testing, PatternClass::V);
    const auto b = evaluate_test(s.final_weights, s.final_threshold, ds.testing, PatternClass::V);
    ASSERT_EQ(a.size(), 3U);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(a[i].output, b[i].output);
        EXPECT_TRUE(a[i].accepted) << a[i].id;
    }
    EXPECT_EQ(a[1].cls, PatternClass::V);
    EXPECT_GT(a[1].output, s.final_threshold);
}

TEST(TrainerConfig, Validation) {
    TrainerConfig c;
    c.eta_max = 0.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = TrainerConfig{};
    c.initial_threshold = -1.0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = TrainerConfig{};
    c.max_epochs = 0;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Shutter, TimeDerivedRange) {
    ShutterModel m;
    m.mode = JitterMode::TimeDerived;
    Engine rng(4);
    for (int i = 0; i < 5000; ++i) {
        const long n = shutter_event(rng, m);
        ASSERT_GE(n, 15);
        ASSERT_LE(n, 25);
    }
}

TEST(Shutter, DegenerateRangeAndFixed) {
    ShutterModel m;
    m.mode = JitterMode::TimeDerived;
    m.open_min_ms = m.open_max_ms = 20.0;
    Engine rng(4);
    for (int i = 0; i < 100; ++i) ASSERT_EQ(shutter_event(rng, m), 20);
    m.mode = JitterMode::Fixed;
    for (int i = 0; i < 100; ++i) ASSERT_EQ(shutter_event(rng, m), 50);
}

TEST(Shutter, RelativeJitterRangeAndDeterminism) {
    ShutterModel m;
    Engine a(8);
    Engine b(8);
    for (int i = 0; i < 5000; ++i) {
        const long n = shutter_event(a, m);
        ASSERT_GE(n, 1);
        ASSERT_LE(n, 50);
        ASSERT_EQ(n, shutter_event(b, m));
    }
    m.open_max_ms = 10.0;
    EXPECT_THROW(m.validate(), ConfigError);
}
