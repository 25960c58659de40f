#pragma once

// Single-output perceptron training: sequential pattern evaluation, one
// signed update per misclassified pattern, stochastic learning rate, and a
// threshold raise whenever a clean pass ends with a negative weight.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "optomag/error.hpp"
#include "optomag/pattern_bank.hpp"
#include "optomag/random.hpp"
#include "optomag/synapse.hpp"

namespace optomag {

using WeightVector = std::array<double, kInputs>;

enum class Decision { Accept, RaiseOutput, LowerOutput };

inline const char* decision_name(Decision d) {
    switch (d) {
    case Decision::Accept: return "accept";
    case Decision::RaiseOutput: return "raise";
    case Decision::LowerOutput: return "lower";
    }
    return "?";
}

struct TrainerConfig {
    double initial_weight = 0.5;
    double initial_threshold = 2.5;
    double eta_max = 0.014;
    int max_epochs = 500;
    PatternClass target_class = PatternClass::V;
    double raise_fraction = 0.05; ///< b <- b * (1 + raise_fraction)
    bool reset_on_raise = false;
    bool fixed_eta = false;       ///< degenerate eta distribution at eta_max

    void validate() const {
        if (!(eta_max > 0.0) || !std::isfinite(eta_max)) throw ConfigError("trainer.eta_max must be positive");
        if (!(initial_threshold > 0.0)) throw ConfigError("trainer.initial_threshold must be positive");
        if (max_epochs < 1) throw ConfigError("trainer.max_epochs must be at least 1");
        if (!(raise_fraction > 0.0)) throw ConfigError("trainer.raise_fraction must be positive");
        if (!std::isfinite(initial_weight)) throw ConfigError("trainer.initial_weight must be finite");
    }
};

/// O = sum_i w_i x_i.
inline double pattern_output(std::span<const double> weights, std::span<const std::uint8_t> inputs) {
    if (weights.size() != inputs.size()) throw UsageError("weight and input vectors differ in length");
    double o = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) o += weights[i] * inputs[i];
    return o;
}

inline double pattern_output(const WeightVector& weights, const Pattern& p) {
    return pattern_output(std::span<const double>(weights), std::span<const std::uint8_t>(p.inputs));
}

/// Strict comparison: O == b is never accepted.
inline Decision classify(double output, double threshold, PatternClass cls, PatternClass target) {
    if (cls == target) return output > threshold ? Decision::Accept : Decision::RaiseOutput;
    return output < threshold ? Decision::Accept : Decision::LowerOutput;
}

inline WeightVector update_weights(WeightVector weights, const Pattern& p, Decision direction, double eta) {
    if (!(eta > 0.0)) throw UsageError("learning rate must be positive");
    if (direction == Decision::Accept) throw UsageError("update_weights needs a raise or lower direction");
    const double s = direction == Decision::RaiseOutput ? 1.0 : -1.0;
    for (std::size_t i = 0; i < kInputs; ++i)
        if (p.inputs[i] != 0) weights[i] += s * eta * p.inputs[i];
    return weights;
}

/// eta uniform on (0, eta_max].
inline double sample_eta(Engine& rng, double eta_max) {
    if (!(eta_max > 0.0)) throw UsageError("eta_max must be positive");
    return eta_max * (1.0 - uniform01(rng));
}

struct SiteUpdate {
    int site = 0;
    long pulses = 0;
    Helicity helicity = Helicity::Write;
};

struct UpdateOutcome {
    double eta = 0.0; ///< sampled rate, or 0 when realized by pulses
    std::vector<SiteUpdate> updates;
    int site_reads = 0;
};

/// What the trainer needs from a weight store: the abstract vector in
/// simulation, the optical rig in emulation.
template <class B>
concept WeightBackend = requires(B& b, const B& cb, const Pattern& p, Decision d, double f) {
    { cb.output(p) } -> std::convertible_to<double>;
    { cb.threshold() } -> std::convertible_to<double>;
    { cb.weights() } -> std::convertible_to<WeightVector>;
    { b.apply_update(p, d) } -> std::same_as<UpdateOutcome>;
    b.raise_threshold(f);
    b.reset();
};

/// Plain weight vector with sampled learning rates. Pulse counts in the
/// update log are equivalents (eta_max maps to pulses_per_eta_max) so that
/// energy accounting also works on simulated traces.
class SimulatedWeights {
public:
    SimulatedWeights(const TrainerConfig& cfg, std::uint64_t seed, long pulses_per_eta_max = 100)
        : cfg_(cfg), rng_(make_stream(seed, Stream::Trainer)), pulses_per_eta_max_(pulses_per_eta_max) {
        cfg_.validate();
        reset();
        threshold_ = cfg_.initial_threshold;
    }

    double output(const Pattern& p) const { return pattern_output(weights_, p); }
    double threshold() const { return threshold_; }
    WeightVector weights() const { return weights_; }

    UpdateOutcome apply_update(const Pattern& p, Decision direction) {
        UpdateOutcome out;
        out.eta = cfg_.fixed_eta ? cfg_.eta_max : sample_eta(rng_, cfg_.eta_max);
        weights_ = update_weights(weights_, p, direction, out.eta);
        const long pulses = std::lround(static_cast<double>(pulses_per_eta_max_) * out.eta / cfg_.eta_max);
        const auto helicity = direction == Decision::RaiseOutput ? Helicity::Write : Helicity::Erase;
        for (std::size_t i = 0; i < kInputs; ++i)
            if (p.inputs[i] != 0) out.updates.push_back({static_cast<int>(i), pulses, helicity});
        out.site_reads = static_cast<int>(out.updates.size());
        return out;
    }

    void raise_threshold(double fraction) { threshold_ *= 1.0 + fraction; }
    void reset() { weights_.fill(cfg_.initial_weight); }

private:
    TrainerConfig cfg_;
    Engine rng_;
    long pulses_per_eta_max_;
    WeightVector weights_{};
    double threshold_ = 0.0;
};

static_assert(WeightBackend<SimulatedWeights>);

struct StepRecord {
    long step = 0;         ///< 1-based, one per pattern evaluation
    int epoch = 0;
    int pattern_index = 0; ///< index into the training list
    std::string pattern_id;
    PatternClass cls = PatternClass::Z;
    double output = 0.0;
    double threshold = 0.0;
    Decision action = Decision::Accept;
    double eta = 0.0;
    std::vector<SiteUpdate> updates;
    int site_reads = 0;
    WeightVector weights{}; ///< after this step
};

struct TrainingSummary {
    long total_steps = 0;
    int epochs = 0;
    int threshold_raises = 0;
    std::vector<long> raise_steps; ///< step index of the pass end that triggered each raise
    bool converged = false;
    WeightVector final_weights{};
    double final_threshold = 0.0;
};

struct TrainingTrace {
    std::vector<StepRecord> steps;
    TrainingSummary summary;
    std::vector<SiteUpdate> init_updates; ///< pulses written before training
    int init_reads = 0;

    long update_count() const {
        long n = 0;
        for (const auto& s : steps) n += s.action != Decision::Accept;
        return n;
    }
};

inline bool all_non_negative(const WeightVector& w) {
    return std::all_of(w.begin(), w.end(), [](double x) { return x >= 0.0; });
}

struct NoObserver {
    template <class B>
    void operator()(const StepRecord&, const B&) const {}
};

/// Runs epochs over the training list in order until a pass has no update
/// and every weight is non-negative, or max_epochs is exhausted. The observer
/// sees each step record and the backend right after the step.
template <WeightBackend B, class Observer = NoObserver>
TrainingTrace train(const Dataset& dataset, const TrainerConfig& cfg, B& backend, Observer observer = {}) {
    cfg.validate();
    TrainingTrace trace;
    trace.steps.reserve(dataset.training.size() * 32);
    long step = 0;
    int epoch = 0;
    while (epoch < cfg.max_epochs) {
        ++epoch;
        bool clean = true;
        for (std::size_t idx = 0; idx < dataset.training.size(); ++idx) {
            const Pattern& p = dataset.training[idx];
            StepRecord rec;
            rec.step = ++step;
            rec.epoch = epoch;
            rec.pattern_index = static_cast<int>(idx);
            rec.pattern_id = p.id();
            rec.cls = p.cls;
            rec.output = backend.output(p);
            rec.threshold = backend.threshold();
            rec.action = classify(rec.output, rec.threshold, p.cls, cfg.target_class);
            if (rec.action != Decision::Accept) {
                clean = false;
                UpdateOutcome out = backend.apply_update(p, rec.action);
                rec.eta = out.eta;
                rec.updates = std::move(out.updates);
                rec.site_reads = out.site_reads;
            }
            rec.weights = backend.weights();
            observer(rec, std::as_const(backend));
            trace.steps.push_back(std::move(rec));
        }
        if (!clean) continue;
        if (all_non_negative(backend.weights())) {
            trace.summary.converged = true;
            break;
        }
        backend.raise_threshold(cfg.raise_fraction);
        ++trace.summary.threshold_raises;
        trace.summary.raise_steps.push_back(step);
        if (cfg.reset_on_raise) backend.reset();
    }
    trace.summary.total_steps = step;
    trace.summary.epochs = epoch;
    trace.summary.final_weights = backend.weights();
    trace.summary.final_threshold = backend.threshold();
    return trace;
}

struct PatternResult {
    std::string id;
    PatternClass cls = PatternClass::Z;
    Role role = Role::Train;
    double output = 0.0;
    bool accepted = false; ///< on its desired side of the threshold
};

/// Read-only evaluation of patterns against fixed weights and threshold.
inline std::vector<PatternResult> evaluate_patterns(const WeightVector& weights, double threshold,
                                                    std::span<const Pattern> patterns,
                                                    PatternClass target) {
    std::vector<PatternResult> out;
    out.reserve(patterns.size());
    for (const auto& p : patterns) {
        const double o = pattern_output(weights, p);
        out.push_back({p.id(), p.cls, p.role, o, classify(o, threshold, p.cls, target) == Decision::Accept});
    }
    return out;
}

inline std::vector<PatternResult> evaluate_test(const WeightVector& weights, double threshold,
                                                std::span<const Pattern> testing, PatternClass target) {
    return evaluate_patterns(weights, threshold, testing, target);
}

inline int count_accepted(std::span<const PatternResult> results) {
    return static_cast<int>(std::count_if(results.begin(), results.end(),
                                          [](const PatternResult& r) { return r.accepted; }));
}

} // namespace optomag
