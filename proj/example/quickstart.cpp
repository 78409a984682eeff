// Simulate a small annotated corpus, approximate the utopia label distribution
// of one sequence, augment it and compute CWL weights.

#include <cstdio>

#include "ulda/ulda.hpp"

int main() {
    using namespace ulda;

    SimConfig sim;
    sim.sequence_count = 4;
    sim.frames_per_sequence = 300;
    sim.feature_dim = 4;
    sim.seed = 7;

    const LabelBinning binning(sim.label_min, sim.label_max, 100);
    const auto corpus = simulate(sim, binning);
    const Sequence& seq = corpus.observed.sequences.front();

    const auto kernel = build_kernel(0.06, 0.02, binning.bin_width());
    const auto before = bin_labels(seq, binning);
    const auto after = convolve(before, kernel);
    const auto plan = make_plan(before, after);

    std::printf("sequence %s: %zu frames\n", seq.id.c_str(), seq.size());
    std::printf("distribution PCC to utopia: raw %.4f, convolved %.4f\n",
                distribution_pcc(before, corpus.utopia_hist.front()), distribution_pcc(after, corpus.utopia_hist.front()));

    AugmentParams params;
    params.seed = sim.seed;
    const auto augmented = augment_sequence(seq, plan, params);
    std::printf("TNS added %zu frames (%zu requested for empty bins were skipped)\n", augmented.provenance.size(),
                plan.total_oversample() - plan.realizable_oversample());

    const auto now = bin_labels(augmented.sequence, binning);
    const auto weights = compute_cwl_weights(now, after, augmented.sequence);
    double lo = weights.weights.front(), hi = lo;
    for (double w : weights.weights) {
        lo = std::min(lo, w);
        hi = std::max(hi, w);
    }
    std::printf("CWL weights: %zu values in [%.3f, %.3f], sum %.1f\n", weights.weights.size(), lo, hi, weights.sum());
    return 0;
}
