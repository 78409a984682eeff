#pragma once

// Label histograms, discretized Gaussian kernels and the convolution that
// turns an observed per-sequence label distribution into its smoothed
// ("utopia") approximation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ulda/dataset.hpp"
#include "ulda/error.hpp"

namespace ulda {

/// What to do with a label outside [label_min, label_max].
enum class RangePolicy { kStrict, kClamp };

/// b equal-width, left-closed bins over [label_min, label_max]; label_max
/// itself folds into the last bin.
class LabelBinning {
public:
    LabelBinning(double label_min, double label_max, std::size_t bin_count)
        : min_(label_min), max_(label_max), bins_(bin_count) {
        if (!(label_min < label_max)) usage_error("label_min must be < label_max");
        if (bin_count < 2) usage_error("bin_count must be >= 2");
    }

    double label_min() const { return min_; }
    double label_max() const { return max_; }
    std::size_t bin_count() const { return bins_; }
    double bin_width() const { return (max_ - min_) / static_cast<double>(bins_); }
    double bin_lower(std::size_t i) const { return min_ + bin_width() * static_cast<double>(i); }
    double bin_center(std::size_t i) const { return min_ + bin_width() * (static_cast<double>(i) + 0.5); }

    bool contains(double label) const { return label >= min_ && label <= max_; }

    /// Bin of an in-range label, std::nullopt otherwise (NaN included).
    std::optional<std::size_t> try_bin(double label) const {
        if (!contains(label)) return std::nullopt;
        const double scaled = (label - min_) * static_cast<double>(bins_) / (max_ - min_);
        auto idx = static_cast<std::size_t>(std::floor(scaled));
        return std::min(idx, bins_ - 1);
    }

    std::size_t bin_of(double label, RangePolicy policy = RangePolicy::kStrict) const {
        if (policy == RangePolicy::kClamp && !std::isnan(label)) label = std::clamp(label, min_, max_);
        if (auto idx = try_bin(label)) return *idx;
        std::ostringstream os;
        os << "label " << label << " outside [" << min_ << ", " << max_ << "]";
        data_error(os.str());
    }

    bool operator==(const LabelBinning&) const = default;

private:
    double min_;
    double max_;
    std::size_t bins_;
};

struct LabelHistogram {
    LabelBinning binning;
    std::vector<double> counts;

    double total_mass() const {
        double s = 0.0;
        for (double c : counts) s += c;
        return s;
    }
};

/// Symmetric discretized Gaussian over integer bin offsets, normalized to 1.
struct DiscreteKernel {
    double kernel_size = 0.0;  // full support width, label units
    double sigma = 0.0;        // label units
    double bin_width = 0.0;
    std::vector<int> offsets;
    std::vector<double> weights;

    int half_width() const { return offsets.empty() ? 0 : offsets.back(); }

    static DiscreteKernel identity() { return DiscreteKernel{0.0, 0.0, 0.0, {0}, {1.0}}; }
};

struct PlanEntry {
    std::size_t bin = 0;
    double n_before = 0.0;
    double n_after = 0.0;
    double delta = 0.0;

    /// Frames to synthesize at this bin: delta rounded half-up, never negative.
    std::size_t oversample_count() const {
        if (!(delta > 0.0)) return 0;
        return static_cast<std::size_t>(std::floor(delta + 0.5));
    }
    bool undersample() const { return delta < 0.0; }
};

struct AugmentationPlan {
    LabelBinning binning;
    std::vector<PlanEntry> entries;  // one per bin, in bin order

    std::size_t total_oversample() const {
        std::size_t n = 0;
        for (const auto& e : entries) n += e.oversample_count();
        return n;
    }

    /// Oversampling that has source frames to draw from. Bins that were empty
    /// before convolution cannot be filled by label-copying oversampling.
    std::size_t realizable_oversample() const {
        std::size_t n = 0;
        for (const auto& e : entries)
            if (e.n_before > 0.0) n += e.oversample_count();
        return n;
    }
};

inline LabelHistogram bin_labels(const Sequence& sequence, const LabelBinning& binning,
                                 RangePolicy policy = RangePolicy::kStrict) {
    if (sequence.empty()) data_error("empty sequence" + (sequence.id.empty() ? "" : " '" + sequence.id + "'"));
    LabelHistogram hist{binning, std::vector<double>(binning.bin_count(), 0.0)};
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        const double y = sequence.frames[i].label;
        double v = y;
        if (policy == RangePolicy::kClamp && !std::isnan(v)) v = std::clamp(v, binning.label_min(), binning.label_max());
        auto idx = binning.try_bin(v);
        if (!idx) {
            std::ostringstream os;
            os << "sequence '" << sequence.id << "' frame " << i << " (t=" << sequence.frames[i].t << "): label " << y
               << " outside [" << binning.label_min() << ", " << binning.label_max() << "]";
            data_error(os.str());
        }
        hist.counts[*idx] += 1.0;
    }
    return hist;
}

inline DiscreteKernel build_kernel(double delta, double sigma, double bin_width) {
    if (!(delta > 0.0) || !(sigma > 0.0) || !(bin_width > 0.0))
        usage_error("kernel size, sigma and bin width must be positive");
    // Relative slack so that delta == bin_width survives rounding (e.g. 2/100 vs 0.02).
    constexpr double kSlack = 1e-9;
    if (delta < bin_width * (1.0 - kSlack)) usage_error("kernel narrower than one bin");

    const int half = static_cast<int>(std::floor(delta / (2.0 * bin_width) + kSlack));
    DiscreteKernel k;
    k.kernel_size = delta;
    k.sigma = sigma;
    k.bin_width = bin_width;
    double sum = 0.0;
    for (int j = -half; j <= half; ++j) {
        const double x = j * bin_width;
        const double w = std::exp(-(x * x) / (2.0 * sigma * sigma));
        k.offsets.push_back(j);
        k.weights.push_back(w);
        sum += w;
    }
    for (auto& w : k.weights) w /= sum;
    // Exact symmetry regardless of summation order.
    for (std::size_t i = 0, n = k.weights.size(); i < n / 2; ++i) k.weights[n - 1 - i] = k.weights[i];
    return k;
}

/// Discrete convolution with boundary renormalization: each source bin spreads
/// its mass over the kernel support that lies inside the histogram, rescaled
/// by the inside kernel mass. Interior bins see the plain convolution; total
/// mass is conserved everywhere.
inline LabelHistogram convolve(const LabelHistogram& hist, const DiscreteKernel& kernel) {
    const auto b = static_cast<long>(hist.counts.size());
    if (kernel.offsets.empty() || kernel.offsets.size() != kernel.weights.size())
        usage_error("malformed kernel");
    if (kernel.half_width() >= b) usage_error("kernel wider than histogram");
    if (kernel.bin_width > 0.0 &&
        std::abs(kernel.bin_width - hist.binning.bin_width()) > 1e-9 * hist.binning.bin_width())
        usage_error("kernel bin width does not match histogram binning");

    LabelHistogram out{hist.binning, std::vector<double>(hist.counts.size(), 0.0)};
    for (long src = 0; src < b; ++src) {
        const double mass = hist.counts[static_cast<std::size_t>(src)];
        if (mass == 0.0) continue;
        double inside = 0.0;
        bool clipped = false;
        for (std::size_t j = 0; j < kernel.offsets.size(); ++j) {
            const long dst = src + kernel.offsets[j];
            if (dst >= 0 && dst < b) inside += kernel.weights[j];
            else clipped = true;
        }
        const double scale = clipped ? mass / inside : mass;
        for (std::size_t j = 0; j < kernel.offsets.size(); ++j) {
            const long dst = src + kernel.offsets[j];
            if (dst >= 0 && dst < b) out.counts[static_cast<std::size_t>(dst)] += kernel.weights[j] * scale;
        }
    }
    return out;
}

inline AugmentationPlan make_plan(const LabelHistogram& before, const LabelHistogram& after) {
    if (!(before.binning == after.binning) || before.counts.size() != after.counts.size())
        data_error("histogram binning mismatch");
    AugmentationPlan plan{before.binning, {}};
    plan.entries.reserve(before.counts.size());
    for (std::size_t i = 0; i < before.counts.size(); ++i)
        plan.entries.push_back({i, before.counts[i], after.counts[i], after.counts[i] - before.counts[i]});
    return plan;
}

/// Bin-wise sum of histograms sharing one binning.
inline LabelHistogram sum_histograms(const std::vector<LabelHistogram>& hists) {
    if (hists.empty()) usage_error("no histograms to sum");
    LabelHistogram out{hists.front().binning, std::vector<double>(hists.front().counts.size(), 0.0)};
    for (const auto& h : hists) {
        if (!(h.binning == out.binning)) data_error("histogram binning mismatch");
        for (std::size_t i = 0; i < h.counts.size(); ++i) out.counts[i] += h.counts[i];
    }
    return out;
}

}  // namespace ulda
