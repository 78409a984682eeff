#pragma once

// Per-frame loss weights. CWL reweights each frame by how much the smoothed
// label distribution wants of its bin relative to what the sequence has; INV,
// LDS and DENSE are the usual imbalanced-regression baselines, normalized the
// same way (per sequence, summing to the frame count) so they compare directly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ulda/dataset.hpp"
#include "ulda/error.hpp"
#include "ulda/label_dist.hpp"

namespace ulda {

enum class WeightScheme { kCwl, kInv, kLds, kDense, kUniform };

inline std::string_view scheme_name(WeightScheme s) {
    switch (s) {
        case WeightScheme::kCwl: return "cwl";
        case WeightScheme::kInv: return "inv";
        case WeightScheme::kLds: return "lds";
        case WeightScheme::kDense: return "dense";
        case WeightScheme::kUniform: return "uniform";
    }
    return "?";
}

inline WeightScheme parse_scheme(std::string_view name) {
    for (auto s : {WeightScheme::kCwl, WeightScheme::kInv, WeightScheme::kLds, WeightScheme::kDense,
                   WeightScheme::kUniform})
        if (scheme_name(s) == name) return s;
    usage_error("unknown weighting scheme '" + std::string(name) + "'");
}

struct WeightTable {
    std::string sequence_id;
    WeightScheme scheme = WeightScheme::kUniform;
    std::vector<double> weights;  // one per frame, sums to the frame count

    double sum() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

namespace detail {

// Rescales raw per-frame weights to sum to their count. All-zero raw weights
// carry no preference and become uniform.
inline std::vector<double> normalize_to_count(std::vector<double> raw) {
    const auto m = static_cast<double>(raw.size());
    double sum = 0.0;
    for (double r : raw) sum += r;
    if (!(sum > 0.0) || !std::isfinite(sum)) {
        std::fill(raw.begin(), raw.end(), 1.0);
        return raw;
    }
    for (auto& r : raw) r = m * r / sum;
    return raw;
}

inline std::vector<std::size_t> frame_bins(const LabelHistogram& before, const Sequence& sequence,
                                           RangePolicy policy) {
    if (std::abs(before.total_mass() - static_cast<double>(sequence.size())) > 1e-9)
        data_error("histogram does not match sequence '" + sequence.id + "' (frame count differs)");
    std::vector<std::size_t> bins;
    bins.reserve(sequence.size());
    for (const auto& f : sequence.frames) {
        const std::size_t b = before.binning.bin_of(f.label, policy);
        if (!(before.counts[b] > 0.0)) data_error("histogram does not match sequence '" + sequence.id + "'");
        bins.push_back(b);
    }
    return bins;
}

}  // namespace detail

inline WeightTable uniform_weights(const Sequence& sequence) {
    return {sequence.id, WeightScheme::kUniform, std::vector<double>(sequence.size(), 1.0)};
}

inline WeightTable compute_cwl_weights(const LabelHistogram& before, const LabelHistogram& after,
                                       const Sequence& sequence, RangePolicy policy = RangePolicy::kStrict) {
    if (!(before.binning == after.binning)) data_error("histogram binning mismatch");
    const auto bins = detail::frame_bins(before, sequence, policy);
    std::vector<double> raw;
    raw.reserve(bins.size());
    for (auto b : bins) raw.push_back(after.counts[b] / before.counts[b]);
    return {sequence.id, WeightScheme::kCwl, detail::normalize_to_count(std::move(raw))};
}

inline WeightTable compute_inv_weights(const LabelHistogram& before, const Sequence& sequence,
                                       RangePolicy policy = RangePolicy::kStrict) {
    const auto bins = detail::frame_bins(before, sequence, policy);
    std::vector<double> raw;
    raw.reserve(bins.size());
    for (auto b : bins) raw.push_back(1.0 / before.counts[b]);
    return {sequence.id, WeightScheme::kInv, detail::normalize_to_count(std::move(raw))};
}

inline WeightTable compute_lds_weights(const LabelHistogram& before, const DiscreteKernel& kernel,
                                       const Sequence& sequence, RangePolicy policy = RangePolicy::kStrict) {
    const auto bins = detail::frame_bins(before, sequence, policy);
    const LabelHistogram smoothed = convolve(before, kernel);
    std::vector<double> raw;
    raw.reserve(bins.size());
    for (auto b : bins) raw.push_back(1.0 / smoothed.counts[b]);
    return {sequence.id, WeightScheme::kLds, detail::normalize_to_count(std::move(raw))};
}

/// Dense-loss weights from a per-bin density: 1 - density, floored at 0.
inline std::vector<double> dense_weights_from_density(std::span<const double> density,
                                                      std::span<const std::size_t> frame_bins) {
    std::vector<double> raw;
    raw.reserve(frame_bins.size());
    for (auto b : frame_bins) raw.push_back(std::max(0.0, 1.0 - density[b]));
    return detail::normalize_to_count(std::move(raw));
}

inline WeightTable compute_dense_weights(const LabelHistogram& before, const DiscreteKernel& kernel,
                                         const Sequence& sequence, RangePolicy policy = RangePolicy::kStrict) {
    const auto bins = detail::frame_bins(before, sequence, policy);
    LabelHistogram smoothed = convolve(before, kernel);
    const double total = smoothed.total_mass();
    for (auto& c : smoothed.counts) c /= total;
    return {sequence.id, WeightScheme::kDense, dense_weights_from_density(smoothed.counts, bins)};
}

/// Dispatch by scheme. `after` is only read for CWL, `kernel` for LDS/DENSE.
inline WeightTable compute_weights(WeightScheme scheme, const LabelHistogram& before, const LabelHistogram& after,
                                   const DiscreteKernel& kernel, const Sequence& sequence,
                                   RangePolicy policy = RangePolicy::kStrict) {
    switch (scheme) {
        case WeightScheme::kCwl: return compute_cwl_weights(before, after, sequence, policy);
        case WeightScheme::kInv: return compute_inv_weights(before, sequence, policy);
        case WeightScheme::kLds: return compute_lds_weights(before, kernel, sequence, policy);
        case WeightScheme::kDense: return compute_dense_weights(before, kernel, sequence, policy);
        case WeightScheme::kUniform: return uniform_weights(sequence);
    }
    usage_error("unknown weighting scheme");
}

/// (1/m) * sum w_i (y_i - yhat_i)^2
inline double weighted_loss(std::span<const double> predictions, std::span<const double> labels,
                            const WeightTable& table) {
    const std::size_t m = labels.size();
    if (predictions.size() != m || table.weights.size() != m) data_error("weighted_loss length mismatch");
    if (m == 0) data_error("weighted_loss on empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double e = labels[i] - predictions[i];
        acc += table.weights[i] * e * e;
    }
    return acc / static_cast<double>(m);
}

}  // namespace ulda
