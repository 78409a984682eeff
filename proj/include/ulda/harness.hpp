#pragma once

// Evaluation harness: strategies that turn training sequences into a
// weighted training set, per-bin error analysis, the three-region summary,
// and the experiment runner over synthetic corpora.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "ulda/annotator_sim.hpp"
#include "ulda/cwl.hpp"
#include "ulda/dataset.hpp"
#include "ulda/error.hpp"
#include "ulda/label_dist.hpp"
#include "ulda/metrics.hpp"
#include "ulda/regressors.hpp"
#include "ulda/rng.hpp"
#include "ulda/tns.hpp"

namespace ulda {

struct UldaParams {
    std::size_t bins = 100;       // b
    double kernel_size = 0.06;    // delta
    double kernel_sigma = 0.02;   // sigma
    std::size_t slice_threshold = 10;  // T
};

enum class RegressorKind { kRidge, kKnn };

struct RegressorConfig {
    RegressorKind kind = RegressorKind::kRidge;
    double ridge_penalty = 1e-3;
    std::size_t knn_k = 10;
};

// ---------------------------------------------------------------------------
// Per-bin errors and regions

struct BinErrors {
    std::size_t count = 0;
    double mean = std::numeric_limits<double>::quiet_NaN();  // mean squared error
    double min = std::numeric_limits<double>::quiet_NaN();
    double max = std::numeric_limits<double>::quiet_NaN();

    double range() const { return max - min; }
};

/// Squared-error statistics of test frames grouped by the bin of their label.
inline std::vector<BinErrors> per_bin_errors(std::span<const double> labels, std::span<const double> predictions,
                                             const LabelBinning& binning) {
    if (labels.size() != predictions.size()) data_error("per_bin_errors: length mismatch");
    std::vector<BinErrors> out(binning.bin_count());
    std::vector<double> sums(binning.bin_count(), 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::size_t b = binning.bin_of(labels[i], RangePolicy::kClamp);
        const double se = (labels[i] - predictions[i]) * (labels[i] - predictions[i]);
        auto& e = out[b];
        if (e.count == 0) {
            e.min = se;
            e.max = se;
        } else {
            e.min = std::min(e.min, se);
            e.max = std::max(e.max, se);
        }
        ++e.count;
        sums[b] += se;
    }
    for (std::size_t b = 0; b < out.size(); ++b)
        if (out[b].count > 0) out[b].mean = sums[b] / static_cast<double>(out[b].count);
    return out;
}

/// Average over populated bins of the per-bin squared-error range.
inline double mean_bin_range(const std::vector<BinErrors>& bins) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& b : bins)
        if (b.count > 0) {
            acc += b.range();
            ++n;
        }
    return n ? acc / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

struct RegionSummary {
    std::size_t first_bin = 0;  // [first_bin, end_bin)
    std::size_t end_bin = 0;
    std::size_t populated = 0;  // bins with a finite MSE
    double mean_mse = std::numeric_limits<double>::quiet_NaN();
    double mse_range = std::numeric_limits<double>::quiet_NaN();

    std::size_t size() const { return end_bin - first_bin; }
};

struct RegionAnalysis {
    std::array<RegionSummary, 3> regions;  // I, II, III
    double threshold = 0.0;
    bool no_dense_region = false;  // nothing reached the threshold; everything is region I
};

/// Region II is the run of bins with count >= threshold that contains the
/// most populated bin; I and III are the bins left and right of it. Per-bin
/// MSE entries that are NaN (no test frames) are left out of the summaries.
inline RegionAnalysis region_analysis(const LabelHistogram& train_hist, std::span<const double> per_bin_mse,
                                      double threshold) {
    if (!(threshold > 0.0)) usage_error("region threshold must be > 0");
    const std::size_t b = train_hist.counts.size();
    if (per_bin_mse.size() != b) data_error("region_analysis: per-bin MSE length mismatch");

    RegionAnalysis out;
    out.threshold = threshold;
    std::size_t lo = b, hi = b;
    const auto mode = static_cast<std::size_t>(
        std::max_element(train_hist.counts.begin(), train_hist.counts.end()) - train_hist.counts.begin());
    if (train_hist.counts[mode] >= threshold) {
        lo = mode;
        hi = mode + 1;
        while (lo > 0 && train_hist.counts[lo - 1] >= threshold) --lo;
        while (hi < b && train_hist.counts[hi] >= threshold) ++hi;
    } else {
        out.no_dense_region = true;
    }
    out.regions[0].first_bin = 0;
    out.regions[0].end_bin = lo;
    out.regions[1].first_bin = lo;
    out.regions[1].end_bin = hi;
    out.regions[2].first_bin = hi;
    out.regions[2].end_bin = b;

    for (auto& r : out.regions) {
        double acc = 0.0, mn = 0.0, mx = 0.0;
        for (std::size_t i = r.first_bin; i < r.end_bin; ++i) {
            const double v = per_bin_mse[i];
            if (std::isnan(v)) continue;
            if (r.populated == 0) mn = mx = v;
            mn = std::min(mn, v);
            mx = std::max(mx, v);
            acc += v;
            ++r.populated;
        }
        if (r.populated > 0) {
            r.mean_mse = acc / static_cast<double>(r.populated);
            r.mse_range = mx - mn;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Strategies

struct TrainingSet {
    std::vector<Feature> features;
    std::vector<double> labels;
    std::vector<double> weights;

    void append(const Sequence& seq, const std::vector<double>& w) {
        for (std::size_t i = 0; i < seq.size(); ++i) {
            features.push_back(seq.frames[i].features);
            labels.push_back(seq.frames[i].label);
            weights.push_back(w[i]);
        }
    }
};

struct StrategyContext {
    LabelBinning binning;
    DiscreteKernel kernel;
    UldaParams params;
    std::uint64_t seed = 0;
};

/// Turns training sequences into a weighted training set. Oversamplers such
/// as SMOGN or C-Mixup plug in here.
class Strategy {
public:
    virtual ~Strategy() = default;
    virtual std::string name() const = 0;
    virtual TrainingSet prepare(const std::vector<Sequence>& train, const StrategyContext& ctx) const = 0;
};

/// Loss reweighting only; uniform weights is the baseline.
class WeightingStrategy final : public Strategy {
public:
    WeightingStrategy(std::string name, WeightScheme scheme) : name_(std::move(name)), scheme_(scheme) {}

    std::string name() const override { return name_; }

    TrainingSet prepare(const std::vector<Sequence>& train, const StrategyContext& ctx) const override {
        TrainingSet ts;
        for (const auto& seq : train) {
            const auto before = bin_labels(seq, ctx.binning, RangePolicy::kClamp);
            const auto after = convolve(before, ctx.kernel);
            const auto table = compute_weights(scheme_, before, after, ctx.kernel, seq, RangePolicy::kClamp);
            ts.append(seq, table.weights);
        }
        return ts;
    }

private:
    std::string name_;
    WeightScheme scheme_;
};

/// TNS fills bins whose smoothed count exceeds the observed one; CWL then
/// weights the augmented sequence against the smoothed target counts.
class TnsCwlStrategy final : public Strategy {
public:
    std::string name() const override { return "tns+cwl"; }

    TrainingSet prepare(const std::vector<Sequence>& train, const StrategyContext& ctx) const override {
        TrainingSet ts;
        AugmentParams ap;
        ap.slice_threshold = ctx.params.slice_threshold;
        ap.seed = ctx.seed;
        ap.range = RangePolicy::kClamp;
        for (const auto& seq : train) {
            const auto before = bin_labels(seq, ctx.binning, RangePolicy::kClamp);
            const auto after = convolve(before, ctx.kernel);
            const auto augmented = augment_sequence(seq, make_plan(before, after), ap);
            const auto now = bin_labels(augmented.sequence, ctx.binning, RangePolicy::kClamp);
            const auto table = compute_cwl_weights(now, after, augmented.sequence, RangePolicy::kClamp);
            ts.append(augmented.sequence, table.weights);
        }
        return ts;
    }
};

inline std::unique_ptr<Strategy> make_strategy(const std::string& name) {
    if (name == "baseline") return std::make_unique<WeightingStrategy>("baseline", WeightScheme::kUniform);
    if (name == "cwl") return std::make_unique<WeightingStrategy>("cwl", WeightScheme::kCwl);
    if (name == "inv") return std::make_unique<WeightingStrategy>("inv", WeightScheme::kInv);
    if (name == "lds") return std::make_unique<WeightingStrategy>("lds", WeightScheme::kLds);
    if (name == "dense") return std::make_unique<WeightingStrategy>("dense", WeightScheme::kDense);
    if (name == "tns+cwl") return std::make_unique<TnsCwlStrategy>();
    usage_error("unknown strategy '" + name + "'");
}

// ---------------------------------------------------------------------------
// Experiment

struct ExperimentConfig {
    SimConfig sim;
    UldaParams ulda;
    RegressorConfig regressor;
    std::size_t repeats = 3;
    double train_fraction = 0.7;
    double region_threshold = 500.0;
    double region_fraction = 0.0;  // > 0: threshold = fraction * max train count
    std::vector<std::string> strategies{"baseline", "cwl", "tns+cwl"};
    std::uint64_t seed = 0;
};

struct StrategyResult {
    std::string name;
    Metrics metrics;
    std::vector<BinErrors> bins;
    double mean_bin_range = 0.0;
    RegionAnalysis regions;
    std::size_t training_frames = 0;
};

/// Everything measured on one corpus.
struct CorpusEvaluation {
    std::uint64_t seed = 0;
    LabelHistogram train_raw;
    LabelHistogram train_convolved;
    LabelHistogram test_utopia;
    double dist_pcc_raw = 0.0;
    double dist_pcc_convolved = 0.0;
    std::vector<StrategyResult> strategies;

    const StrategyResult& strategy(const std::string& name) const {
        for (const auto& s : strategies)
            if (s.name == name) return s;
        usage_error("strategy '" + name + "' not evaluated");
    }
};

struct Split {
    std::vector<Sequence> train;
    std::vector<Sequence> test;
};

/// Whole-sequence train/test split after a seeded shuffle.
inline Split split_by_sequence(const SequenceDataset& ds, double train_fraction, std::uint64_t seed) {
    const std::size_t n = ds.sequences.size();
    if (n < 2) usage_error("need at least two sequences to split");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) usage_error("train_fraction must be in (0, 1)");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng = Rng(seed).split("split");
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    Split s;
    for (std::size_t i = 0; i < n; ++i) {
        auto& dst = i < n_train ? s.train : s.test;
        dst.push_back(ds.sequences[order[i]]);
    }
    return s;
}

inline std::vector<double> predict_with(const RegressorConfig& rc, const TrainingSet& ts,
                                        const std::vector<Feature>& queries) {
    if (rc.kind == RegressorKind::kRidge)
        return fit_weighted_ridge(ts.features, ts.labels, ts.weights, rc.ridge_penalty).predict(queries);
    const std::size_t k = std::min(rc.knn_k, ts.features.size());
    return fit_weighted_knn(ts.features, ts.labels, ts.weights, k).predict(queries);
}

/// Runs every configured strategy on one already-generated corpus.
/// Test targets are the utopia labels.
inline CorpusEvaluation evaluate_corpus(const SequenceDataset& observed, const ExperimentConfig& config,
                                        std::uint64_t seed) {
    const LabelBinning binning(observed.label_min, observed.label_max, config.ulda.bins);
    const DiscreteKernel kernel = build_kernel(config.ulda.kernel_size, config.ulda.kernel_sigma, binning.bin_width());
    const Split split = split_by_sequence(observed, config.train_fraction, seed);

    CorpusEvaluation ev{seed, {binning, {}}, {binning, {}}, {binning, {}}, 0.0, 0.0, {}};
    std::vector<LabelHistogram> raw, conv, test;
    for (const auto& s : split.train) {
        raw.push_back(bin_labels(s, binning, RangePolicy::kClamp));
        conv.push_back(convolve(raw.back(), kernel));
    }
    std::vector<Feature> test_features;
    std::vector<double> test_labels;
    for (const auto& s : split.test) {
        test.push_back(utopia_distribution(s, binning));
        for (const auto& f : s.frames) {
            if (!f.utopia_label) data_error("test sequence '" + s.id + "' lacks utopia labels");
            test_features.push_back(f.features);
            test_labels.push_back(*f.utopia_label);
        }
    }
    ev.train_raw = sum_histograms(raw);
    ev.train_convolved = sum_histograms(conv);
    ev.test_utopia = sum_histograms(test);
    ev.dist_pcc_raw = distribution_pcc(ev.train_raw, ev.test_utopia);
    ev.dist_pcc_convolved = distribution_pcc(ev.train_convolved, ev.test_utopia);

    const double max_count = *std::max_element(ev.train_raw.counts.begin(), ev.train_raw.counts.end());
    const double threshold = config.region_fraction > 0.0 ? config.region_fraction * max_count
                                                          : config.region_threshold;
    const StrategyContext ctx{binning, kernel, config.ulda, seed};
    for (const auto& name : config.strategies) {
        const auto strategy = make_strategy(name);
        const TrainingSet ts = strategy->prepare(split.train, ctx);
        const auto predictions = predict_with(config.regressor, ts, test_features);
        StrategyResult r;
        r.name = name;
        r.metrics = evaluate(test_labels, predictions);
        r.bins = per_bin_errors(test_labels, predictions, binning);
        r.mean_bin_range = mean_bin_range(r.bins);
        std::vector<double> bin_mse;
        for (const auto& b : r.bins) bin_mse.push_back(b.mean);
        r.regions = region_analysis(ev.train_raw, bin_mse, threshold);
        r.training_frames = ts.features.size();
        ev.strategies.push_back(std::move(r));
    }
    return ev;
}

inline CorpusEvaluation evaluate_seed(const ExperimentConfig& config, std::uint64_t seed) {
    SimConfig sim = config.sim;
    sim.seed = seed;
    const LabelBinning binning(sim.label_min, sim.label_max, config.ulda.bins);
    return evaluate_corpus(simulate(sim, binning).observed, config, seed);
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population std over repeats
};

inline MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd r;
    if (xs.empty()) return r;
    for (double x : xs) r.mean += x;
    r.mean /= static_cast<double>(xs.size());
    for (double x : xs) r.std += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(r.std / static_cast<double>(xs.size()));
    return r;
}

struct StrategySummary {
    std::string name;
    MeanStd mse;
    MeanStd pcc;
    MeanStd mean_bin_range;
    std::vector<double> bin_mse;        // per-bin mean over repeats (NaN where never populated)
    std::vector<double> bin_mse_lo;     // per-bin min squared error over repeats
    std::vector<double> bin_mse_hi;     // per-bin max squared error over repeats
    RegionAnalysis regions;             // on summed train histogram and averaged per-bin MSE
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<std::uint64_t> seeds;
    MeanStd dist_pcc_raw;
    MeanStd dist_pcc_convolved;
    LabelHistogram train_raw{LabelBinning(-1, 1, 2), {}};  // summed over repeats
    LabelHistogram train_convolved{LabelBinning(-1, 1, 2), {}};
    LabelHistogram test_utopia{LabelBinning(-1, 1, 2), {}};
    std::vector<StrategySummary> strategies;
};

/// Repeats evaluate_seed with seeds seed, seed+1, ... and averages.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    if (config.repeats < 1) usage_error("repeats must be >= 1");
    if (config.strategies.empty()) usage_error("no strategies configured");
    ExperimentReport rep;
    rep.config = config;
    std::vector<CorpusEvaluation> evals;
    for (std::size_t r = 0; r < config.repeats; ++r) {
        const std::uint64_t seed = config.seed + r;
        rep.seeds.push_back(seed);
        evals.push_back(evaluate_seed(config, seed));
    }
    std::vector<double> raw, conv;
    std::vector<LabelHistogram> hr, hc, ht;
    for (const auto& e : evals) {
        raw.push_back(e.dist_pcc_raw);
        conv.push_back(e.dist_pcc_convolved);
        hr.push_back(e.train_raw);
        hc.push_back(e.train_convolved);
        ht.push_back(e.test_utopia);
    }
    rep.dist_pcc_raw = mean_std(raw);
    rep.dist_pcc_convolved = mean_std(conv);
    rep.train_raw = sum_histograms(hr);
    rep.train_convolved = sum_histograms(hc);
    rep.test_utopia = sum_histograms(ht);

    const std::size_t b = config.ulda.bins;
    const double max_count = *std::max_element(rep.train_raw.counts.begin(), rep.train_raw.counts.end());
    const double threshold = config.region_fraction > 0.0
                                 ? config.region_fraction * max_count
                                 : config.region_threshold * static_cast<double>(config.repeats);
    for (std::size_t k = 0; k < config.strategies.size(); ++k) {
        StrategySummary s;
        s.name = config.strategies[k];
        std::vector<double> mses, pccs, ranges;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        s.bin_mse.assign(b, nan);
        s.bin_mse_lo.assign(b, nan);
        s.bin_mse_hi.assign(b, nan);
        std::vector<double> bin_sum(b, 0.0);
        std::vector<std::size_t> bin_n(b, 0);
        for (const auto& e : evals) {
            const auto& r = e.strategies[k];
            mses.push_back(r.metrics.mse);
            pccs.push_back(r.metrics.pcc);
            ranges.push_back(r.mean_bin_range);
            for (std::size_t i = 0; i < b; ++i) {
                const auto& be = r.bins[i];
                if (be.count == 0) continue;
                bin_sum[i] += be.mean * static_cast<double>(be.count);
                bin_n[i] += be.count;
                s.bin_mse_lo[i] = std::isnan(s.bin_mse_lo[i]) ? be.min : std::min(s.bin_mse_lo[i], be.min);
                s.bin_mse_hi[i] = std::isnan(s.bin_mse_hi[i]) ? be.max : std::max(s.bin_mse_hi[i], be.max);
            }
        }
        for (std::size_t i = 0; i < b; ++i)
            if (bin_n[i] > 0) s.bin_mse[i] = bin_sum[i] / static_cast<double>(bin_n[i]);
        s.mse = mean_std(mses);
        s.pcc = mean_std(pccs);
        s.mean_bin_range = mean_std(ranges);
        s.regions = region_analysis(rep.train_raw, s.bin_mse, threshold);
        rep.strategies.push_back(std::move(s));
    }
    return rep;
}

}  // namespace ulda
