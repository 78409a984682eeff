#pragma once

// Time-slice Normal Sampling.
//
// For every label bin that needs more frames than the sequence holds, new
// frames are synthesized in feature space: pick a time slice of that bin with
// probability proportional to its length, fit a contribution-weighted normal
// to the features around the slice, draw from it, and give each draw the label
// of its nearest original frame in the slice. Draws are inserted right after
// the matched frame, so the timeline keeps its local context.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "ulda/dataset.hpp"
#include "ulda/error.hpp"
#include "ulda/label_dist.hpp"
#include "ulda/rng.hpp"

namespace ulda {

/// Maximal run [start, end) of consecutive frames in one label bin.
struct TimeSlice {
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t bin = 0;

    std::size_t length() const { return end - start; }
    bool operator==(const TimeSlice&) const = default;
};

struct SliceSet {
    std::size_t bin = 0;
    std::vector<TimeSlice> slices;  // sorted by start, disjoint

    std::size_t total_length() const {
        std::size_t n = 0;
        for (const auto& s : slices) n += s.length();
        return n;
    }
};

/// Frame index range [start, end) used for normal estimation.
struct FrameWindow {
    std::size_t start = 0;
    std::size_t end = 0;

    std::size_t length() const { return end - start; }
    bool operator==(const FrameWindow&) const = default;
};

struct FeatureNormal {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;  // before regularization
    double lambda = 0.0;         // added to the diagonal when sampling

    std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }

    Eigen::MatrixXd regularized() const {
        Eigen::MatrixXd c = covariance;
        c.diagonal().array() += lambda;
        return c;
    }
};

struct SyntheticFrame {
    Feature feature;
    double label = 0.0;
    std::size_t insert_position = 0;  // index in the original sequence it precedes
    std::size_t matched_frame = 0;
    TimeSlice slice;
};

struct ProvenanceRecord {
    std::string sequence_id;
    std::size_t bin = 0;
    std::size_t slice_start = 0;
    std::size_t slice_end = 0;
    std::size_t matched_frame = 0;
    std::size_t insert_position = 0;
    std::size_t output_index = 0;  // row of the synthetic frame in the augmented sequence
    std::uint64_t seed = 0;

    bool operator==(const ProvenanceRecord&) const = default;
};

struct AugmentParams {
    std::size_t slice_threshold = 10;  // T
    std::uint64_t seed = 0;
    RangePolicy range = RangePolicy::kStrict;
    // When false, bins that had no frames before convolution are skipped (the
    // label-copy rule can never place a frame there). When true they are errors.
    bool strict_empty_bins = false;
};

struct AugmentResult {
    Sequence sequence;
    std::vector<ProvenanceRecord> provenance;
    std::size_t skipped_empty_bins = 0;
};

inline SliceSet segment_slices(const Sequence& sequence, std::size_t bin, const LabelBinning& binning,
                               RangePolicy policy = RangePolicy::kStrict) {
    SliceSet set{bin, {}};
    const std::size_t n = sequence.size();
    std::size_t i = 0;
    while (i < n) {
        if (binning.bin_of(sequence.frames[i].label, policy) != bin) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < n && binning.bin_of(sequence.frames[j].label, policy) == bin) ++j;
        set.slices.push_back({i, j, bin});
        i = j;
    }
    if (set.slices.empty()) {
        std::ostringstream os;
        os << "no frames at label bin " << bin << " in sequence '" << sequence.id << "'";
        data_error(os.str());
    }
    return set;
}

/// Selection probability of each slice, proportional to its length.
inline std::vector<double> slice_probabilities(const SliceSet& set) {
    const std::size_t total = set.total_length();
    if (total == 0) usage_error("slice set has zero total length");
    std::vector<double> p;
    p.reserve(set.slices.size());
    for (const auto& s : set.slices) p.push_back(static_cast<double>(s.length()) / static_cast<double>(total));
    return p;
}

/// One categorical draw over `probabilities` (assumed to sum to 1).
inline std::size_t draw_index(std::span<const double> probabilities, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k < probabilities.size(); ++k) {
        acc += probabilities[k];
        if (u < acc) return k;
    }
    // u landed in the rounding gap above the last partial sum.
    for (std::size_t k = probabilities.size(); k-- > 0;)
        if (probabilities[k] > 0.0) return k;
    return 0;
}

/// Grows a slice shorter than `threshold` one frame at a time, alternating
/// left then right; a side blocked by the sequence boundary yields to the other.
inline FrameWindow extend_slice(std::size_t sequence_length, const TimeSlice& slice, std::size_t threshold) {
    FrameWindow w{slice.start, slice.end};
    if (w.length() >= threshold) return w;
    const std::size_t target = std::min(threshold, sequence_length);
    bool left_turn = true;
    while (w.length() < target) {
        const bool can_left = w.start > 0;
        const bool can_right = w.end < sequence_length;
        if ((left_turn && can_left) || !can_right) --w.start;
        else ++w.end;
        left_turn = !left_turn;
    }
    return w;
}

/// Normalized Gaussian label density around the slice's label mean, with the
/// spread taken from the (extended) window. A zero spread is replaced by
/// `sigma_floor`.
inline std::vector<double> contribution_weights(std::span<const double> window_labels,
                                                std::span<const double> slice_labels, double sigma_floor) {
    if (window_labels.empty() || slice_labels.empty()) usage_error("contribution weights need non-empty labels");
    double mu = 0.0;
    for (double y : slice_labels) mu += y;
    mu /= static_cast<double>(slice_labels.size());

    double wmean = 0.0;
    for (double y : window_labels) wmean += y;
    wmean /= static_cast<double>(window_labels.size());
    double var = 0.0;
    for (double y : window_labels) var += (y - wmean) * (y - wmean);
    var /= static_cast<double>(window_labels.size());  // population variance
    double sigma = std::sqrt(var);
    if (!(sigma > 0.0)) sigma = sigma_floor;
    if (!(sigma > 0.0)) usage_error("contribution weights need a positive sigma floor");

    // The 1/(sqrt(2 pi) sigma) factor cancels in the normalization.
    std::vector<double> c;
    c.reserve(window_labels.size());
    double sum = 0.0;
    for (double y : window_labels) {
        const double z = (y - mu) / sigma;
        c.push_back(std::exp(-0.5 * z * z));
        sum += c.back();
    }
    for (auto& v : c) v /= sum;
    return c;
}

/// Contribution-weighted mean and covariance of the window features.
///
/// The covariance is kept unregularized in the result; `lambda` is set to
/// max(1e-8, 1e-6 * trace / d). With fewer window frames than dimensions only
/// the diagonal is kept.
inline FeatureNormal estimate_normal(const std::vector<Feature>& window_features, std::span<const double> c) {
    if (window_features.empty()) usage_error("estimate_normal on empty window");
    if (window_features.size() != c.size()) data_error("contribution weight count does not match window size");
    const std::size_t d = window_features.front().size();
    if (d == 0) data_error("zero-dimensional features");
    for (const auto& f : window_features)
        if (f.size() != d) data_error("feature dimension mismatch in window");

    const auto dim = static_cast<Eigen::Index>(d);
    FeatureNormal normal{Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Zero(dim, dim), 0.0};
    for (std::size_t i = 0; i < window_features.size(); ++i)
        normal.mean += c[i] * Eigen::Map<const Eigen::VectorXd>(window_features[i].data(), dim);
    for (std::size_t i = 0; i < window_features.size(); ++i) {
        const Eigen::VectorXd diff = Eigen::Map<const Eigen::VectorXd>(window_features[i].data(), dim) - normal.mean;
        normal.covariance.noalias() += c[i] * diff * diff.transpose();
    }
    // Symmetrize exactly.
    normal.covariance = 0.5 * (normal.covariance + normal.covariance.transpose()).eval();
    if (window_features.size() < d) normal.covariance = Eigen::MatrixXd(normal.covariance.diagonal().asDiagonal());

    normal.lambda = std::max(1e-8, 1e-6 * normal.covariance.trace() / static_cast<double>(d));
    return normal;
}

/// `count` independent draws from N(mean, covariance + lambda I).
inline std::vector<Feature> sample_features(const FeatureNormal& normal, std::size_t count, Rng& rng) {
    std::vector<Feature> out;
    if (count == 0) return out;
    const Eigen::MatrixXd cov = normal.regularized();
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (!cov.allFinite() || llt.info() != Eigen::Success) {
        std::ostringstream os;
        os << "degenerate covariance (lambda=" << normal.lambda << ")";
        numeric_error(os.str());
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    const auto dim = static_cast<Eigen::Index>(normal.dim());
    out.reserve(count);
    Eigen::VectorXd z(dim);
    for (std::size_t k = 0; k < count; ++k) {
        for (Eigen::Index j = 0; j < dim; ++j) z[j] = rng.normal();
        const Eigen::VectorXd x = normal.mean + lower * z;
        out.emplace_back(x.data(), x.data() + dim);
    }
    return out;
}

/// Labels each new feature with its Euclidean-nearest original frame inside
/// the (unextended) slice; ties go to the earlier frame.
inline std::vector<SyntheticFrame> assign_and_insert(const Sequence& sequence, const std::vector<Feature>& new_features,
                                                     const TimeSlice& slice) {
    if (slice.length() == 0 || slice.end > sequence.size()) usage_error("invalid slice");
    std::vector<SyntheticFrame> out;
    out.reserve(new_features.size());
    for (const auto& f : new_features) {
        std::size_t best = slice.start;
        double best_d2 = 0.0;
        for (std::size_t i = slice.start; i < slice.end; ++i) {
            const auto& g = sequence.frames[i].features;
            if (g.size() != f.size()) data_error("feature dimension mismatch");
            double d2 = 0.0;
            for (std::size_t j = 0; j < f.size(); ++j) d2 += (f[j] - g[j]) * (f[j] - g[j]);
            if (i == slice.start || d2 < best_d2) {
                best = i;
                best_d2 = d2;
            }
        }
        out.push_back({f, sequence.frames[best].label, best + 1, best, slice});
    }
    return out;
}

/// Runs TNS on one sequence for every bin the plan asks to oversample.
///
/// The generator stream is derived from (seed, sequence id), so sequences can
/// be processed in any order or in parallel with identical results.
inline AugmentResult augment_sequence(const Sequence& sequence, const AugmentationPlan& plan,
                                      const AugmentParams& params) {
    if (params.slice_threshold < 1) usage_error("slice threshold must be >= 1");
    if (plan.entries.size() != plan.binning.bin_count()) data_error("plan does not cover every bin");

    AugmentResult result{sequence, {}, 0};
    const LabelBinning& binning = plan.binning;
    Rng rng = Rng(params.seed).split(sequence.id);
    std::vector<SyntheticFrame> synthetic;

    for (const auto& entry : plan.entries) {
        const std::size_t q = entry.oversample_count();
        if (q == 0) continue;
        if (entry.n_before <= 0.0 && !params.strict_empty_bins) {
            ++result.skipped_empty_bins;
            continue;
        }
        SliceSet set;
        try {
            set = segment_slices(sequence, entry.bin, binning, params.range);
        } catch (const Error&) {
            std::ostringstream os;
            os << "plan/sequence mismatch: plan oversamples bin " << entry.bin << " but sequence '" << sequence.id
               << "' has no frames there";
            data_error(os.str());
        }
        const auto probs = slice_probabilities(set);
        std::vector<std::size_t> per_slice(set.slices.size(), 0);
        for (std::size_t k = 0; k < q; ++k) ++per_slice[draw_index(probs, rng)];

        for (std::size_t s = 0; s < set.slices.size(); ++s) {
            if (per_slice[s] == 0) continue;
            const TimeSlice& slice = set.slices[s];
            const FrameWindow window = extend_slice(sequence.size(), slice, params.slice_threshold);

            std::vector<double> window_labels;
            std::vector<Feature> window_features;
            for (std::size_t i = window.start; i < window.end; ++i) {
                window_labels.push_back(sequence.frames[i].label);
                window_features.push_back(sequence.frames[i].features);
            }
            std::vector<double> slice_labels;
            for (std::size_t i = slice.start; i < slice.end; ++i) slice_labels.push_back(sequence.frames[i].label);

            const auto c = contribution_weights(window_labels, slice_labels, binning.bin_width() / 2.0);
            const FeatureNormal normal = estimate_normal(window_features, c);
            const auto draws = sample_features(normal, per_slice[s], rng);
            for (auto& frame : assign_and_insert(sequence, draws, slice)) synthetic.push_back(std::move(frame));
        }
    }
    if (synthetic.empty()) return result;

    // Stable by insert position: frames for one gap keep generation order.
    std::vector<std::size_t> order(synthetic.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return synthetic[a].insert_position < synthetic[b].insert_position;
    });

    Sequence out{sequence.id, {}};
    out.frames.reserve(sequence.size() + synthetic.size());
    std::vector<std::size_t> output_index(synthetic.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i <= sequence.size(); ++i) {
        while (next < order.size() && synthetic[order[next]].insert_position == i) {
            const auto& s = synthetic[order[next]];
            const auto& matched = sequence.frames[s.matched_frame];
            output_index[order[next]] = out.frames.size();
            out.frames.push_back(Frame{0, s.label, matched.utopia_label, s.feature});
            ++next;
        }
        if (i < sequence.size()) out.frames.push_back(sequence.frames[i]);
    }
    for (std::size_t i = 0; i < out.frames.size(); ++i) out.frames[i].t = static_cast<std::int64_t>(i);

    result.provenance.reserve(synthetic.size());
    for (std::size_t k = 0; k < synthetic.size(); ++k) {
        const auto& s = synthetic[k];
        result.provenance.push_back({sequence.id, s.slice.bin, s.slice.start, s.slice.end, s.matched_frame,
                                     s.insert_position, output_index[k], params.seed});
    }
    result.sequence = std::move(out);
    return result;
}

}  // namespace ulda
