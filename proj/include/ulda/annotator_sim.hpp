#pragma once

// Synthetic corpora with a known utopia label distribution.
//
// Each sequence gets a smooth "true" label curve (Gaussian-filtered noise
// squashed into the label range) and features that are a fixed nonlinear
// embedding of the true label plus noise. Observed labels are the mean of a
// handful of Gaussian annotator votes around the truth.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ulda/dataset.hpp"
#include "ulda/error.hpp"
#include "ulda/label_dist.hpp"
#include "ulda/rng.hpp"

namespace ulda {

struct SimConfig {
    std::size_t sequence_count = 20;
    std::size_t frames_per_sequence = 400;  // m
    std::size_t feature_dim = 8;            // d
    std::size_t annotator_count = 3;        // n
    double vote_std = 0.1;                  // per-vote std, label units
    double label_min = -1.0;
    double label_max = 1.0;
    double smoothness = 20.0;     // correlation length of the true curve, frames
    double label_spread = 1.0;    // gain inside the tanh squashing
    double feature_noise = 0.1;   // isotropic feature noise std
    bool clamp_observed = true;
    std::uint64_t seed = 0;

    void validate() const {
        if (sequence_count < 1) usage_error("sequence_count must be >= 1");
        if (frames_per_sequence < 2) usage_error("frames_per_sequence must be >= 2");
        if (feature_dim < 1) usage_error("feature_dim must be >= 1");
        if (annotator_count < 1) usage_error("annotator_count must be >= 1");
        if (!(vote_std >= 0.0)) usage_error("vote_std must be >= 0");
        if (!(label_min < label_max)) usage_error("label_min must be < label_max");
        if (!(smoothness > 0.0)) usage_error("smoothness must be > 0");
        if (!(feature_noise >= 0.0)) usage_error("feature_noise must be >= 0");
    }
};

struct SyntheticCorpus {
    SequenceDataset truth;     // labels are the utopia labels
    SequenceDataset observed;  // labels are annotator means
    std::vector<LabelHistogram> utopia_hist;
};

/// Per-frame vote standard deviation, indexed by (sequence, frame).
using VoteStdFn = std::function<double(std::size_t, std::size_t)>;

inline std::string sequence_name(std::size_t index) {
    std::string digits = std::to_string(index);
    if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
    return "seq" + digits;
}

namespace detail {

// Unit-variance smooth process: white noise filtered by a Gaussian whose
// taps have unit sum of squares.
inline std::vector<double> smooth_noise(std::size_t length, double correlation, Rng& rng) {
    const auto pad = static_cast<std::size_t>(std::ceil(4.0 * correlation));
    std::vector<double> taps(2 * pad + 1);
    double sq = 0.0;
    for (std::size_t k = 0; k < taps.size(); ++k) {
        const double x = static_cast<double>(k) - static_cast<double>(pad);
        taps[k] = std::exp(-x * x / (2.0 * correlation * correlation));
        sq += taps[k] * taps[k];
    }
    const double norm = 1.0 / std::sqrt(sq);
    for (auto& t : taps) t *= norm;

    std::vector<double> white(length + 2 * pad);
    for (auto& w : white) w = rng.normal();
    std::vector<double> out(length, 0.0);
    for (std::size_t i = 0; i < length; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < taps.size(); ++k) acc += taps[k] * white[i + k];
        out[i] = acc;
    }
    return out;
}

}  // namespace detail

inline SequenceDataset generate_truth(const SimConfig& config) {
    config.validate();
    const Rng base(config.seed);
    Rng embed_rng = base.split("embedding");
    std::vector<double> gain(config.feature_dim), bias(config.feature_dim);
    for (std::size_t j = 0; j < config.feature_dim; ++j) {
        gain[j] = embed_rng.normal(0.0, 1.5);
        bias[j] = embed_rng.normal(0.0, 0.5);
    }
    const double mid = 0.5 * (config.label_min + config.label_max);
    const double half = 0.5 * (config.label_max - config.label_min);

    SequenceDataset ds{config.feature_dim, config.label_min, config.label_max, {}};
    ds.sequences.reserve(config.sequence_count);
    for (std::size_t s = 0; s < config.sequence_count; ++s) {
        Rng rng = base.split("truth").split(s);
        const auto z = detail::smooth_noise(config.frames_per_sequence, config.smoothness, rng);
        Sequence seq{sequence_name(s), {}};
        seq.frames.reserve(config.frames_per_sequence);
        for (std::size_t i = 0; i < config.frames_per_sequence; ++i) {
            const double y = std::clamp(mid + half * std::tanh(config.label_spread * z[i]), config.label_min,
                                        config.label_max);
            Feature f(config.feature_dim);
            for (std::size_t j = 0; j < config.feature_dim; ++j)
                f[j] = std::tanh(gain[j] * y + bias[j]) + config.feature_noise * rng.normal();
            seq.frames.push_back(Frame{static_cast<std::int64_t>(i), y, y, std::move(f)});
        }
        ds.sequences.push_back(std::move(seq));
    }
    return ds;
}

/// Replaces each label by the mean of n Gaussian votes around it. The truth
/// label is kept in `utopia_label`.
inline SequenceDataset annotate(const SequenceDataset& truth, std::size_t n, const VoteStdFn& vote_std, Rng& rng,
                                bool clamp = true) {
    if (n < 1) usage_error("annotator count must be >= 1");
    SequenceDataset out = truth;
    for (std::size_t s = 0; s < out.sequences.size(); ++s) {
        auto& frames = out.sequences[s].frames;
        for (std::size_t i = 0; i < frames.size(); ++i) {
            const double y = truth.sequences[s].frames[i].label;
            const double sd = vote_std(s, i);
            double mean = y;
            if (sd > 0.0) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n; ++k) acc += rng.normal(y, sd);
                mean = acc / static_cast<double>(n);
            }
            if (clamp) mean = std::clamp(mean, truth.label_min, truth.label_max);
            frames[i].label = mean;
            frames[i].utopia_label = y;
        }
    }
    return out;
}

inline SequenceDataset annotate(const SequenceDataset& truth, std::size_t n, double vote_std, Rng& rng,
                                bool clamp = true) {
    if (!(vote_std >= 0.0)) usage_error("vote_std must be >= 0");
    return annotate(truth, n, [vote_std](std::size_t, std::size_t) { return vote_std; }, rng, clamp);
}

/// Histogram of the true labels: the distribution the convolution should approach.
inline LabelHistogram utopia_distribution(const Sequence& truth, const LabelBinning& binning) {
    Sequence labelled = truth;
    for (auto& f : labelled.frames)
        if (f.utopia_label) f.label = *f.utopia_label;
    return bin_labels(labelled, binning, RangePolicy::kClamp);
}

inline SyntheticCorpus simulate(const SimConfig& config, const LabelBinning& binning) {
    SyntheticCorpus corpus;
    corpus.truth = generate_truth(config);
    Rng vote_rng = Rng(config.seed).split("annotate");
    corpus.observed = annotate(corpus.truth, config.annotator_count, config.vote_std, vote_rng,
                               config.clamp_observed);
    for (const auto& s : corpus.truth.sequences) corpus.utopia_hist.push_back(utopia_distribution(s, binning));
    return corpus;
}

}  // namespace ulda
