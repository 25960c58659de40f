// Train the perceptron once in software and once on the emulated rig, then
// print how each classifies the held-out patterns.

#include <cstdio>

#include "optomag.hpp"

int main() {
    using namespace optomag;
    const Dataset ds = build_dataset(Bitmaps::defaults());

    TrainerConfig cfg;
    SimulatedWeights weights(cfg, /*seed=*/7);
    const TrainingTrace sim = train(ds, cfg, weights);
    std::printf("simulate: converged=%d steps=%ld\n", sim.summary.converged, sim.summary.total_steps);

    EmulatedRig rig(RigConfig{}, SynapseConfig{}, OpticalConstants{}, CameraConfig{}, ShutterModel{}, 7);
    rig.initialize_network();
    const TrainingTrace emu = train(ds, cfg, rig);
    std::printf("emulate:  converged=%d steps=%ld\n", emu.summary.converged, emu.summary.total_steps);

    for (const auto& r : evaluate_test(emu.summary.final_weights, emu.summary.final_threshold, ds.testing,
                                       ds.desired_above))
        std::printf("  %s  O/b = %.3f  %s\n", r.id.c_str(), r.output / emu.summary.final_threshold,
                    r.accepted ? "ok" : "wrong side");
    return sim.summary.converged ? 0 : 1;
}
