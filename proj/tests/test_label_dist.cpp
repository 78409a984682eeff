#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "ulda/label_dist.hpp"

using namespace ulda;
using ulda::testing::make_sequence;
using ulda::testing::naive_convolve;

TEST(Binning, RightEdgeFoldsIntoLastBin) {
    const LabelBinning b(-1.0, 1.0, 2);
    const auto h = bin_labels(make_sequence({-1.0, -1.0, 1.0}), b);
    EXPECT_EQ(h.counts, (std::vector<double>{2.0, 1.0}));
    EXPECT_EQ(h.total_mass(), 3.0);
}

TEST(Binning, EqualLabelsShareOneBin) {
    const LabelBinning b(-1.0, 1.0, 10);
    const auto h = bin_labels(make_sequence({0.33, 0.33, 0.33}), b);
    EXPECT_EQ(h.counts[6], 3.0);
    EXPECT_EQ(h.total_mass(), 3.0);
    EXPECT_EQ(std::count(h.counts.begin(), h.counts.end(), 0.0), 9);
}

TEST(Binning, UniformGridFillsEveryBinOnce) {
    const LabelBinning b(-1.0, 1.0, 100);
    // Brute-force oracle: a grid point x belongs to bin i iff lower_i <= x < upper_i,
    // evaluated with interval comparisons rather than the floor formula.
    for (bool centers : {true, false}) {
        std::vector<double> labels;
        for (int i = 0; i < 100; ++i) labels.push_back(centers ? -1.0 + 0.02 * (i + 0.5) : -1.0 + 2.0 * i / 99.0);
        std::vector<double> oracle(100, 0.0);
        for (double x : labels)
            for (int i = 0; i < 100; ++i) {
                const double lo = -1.0 + 2.0 * i / 100.0, hi = -1.0 + 2.0 * (i + 1) / 100.0;
                if ((x >= lo && x < hi) || (i == 99 && x == 1.0)) {
                    oracle[static_cast<std::size_t>(i)] += 1.0;
                    break;
                }
            }
        EXPECT_EQ(oracle, std::vector<double>(100, 1.0));
        EXPECT_EQ(bin_labels(make_sequence(labels), b).counts, oracle) << (centers ? "centers" : "linspace");
    }
}

TEST(Binning, TotalityOverRandomLabels) {
    const LabelBinning b(-1.0, 1.0, 37);
    Rng rng(7);
    for (int k = 0; k < 10000; ++k) {
        const double y = -1.0 + 2.0 * rng.uniform();
        const auto idx = b.try_bin(y);
        ASSERT_TRUE(idx.has_value());
        ASSERT_LT(*idx, 37u);
        // exactly one bin's half-open interval holds it (last bin closed)
        int hits = 0;
        for (std::size_t i = 0; i < 37; ++i) {
            const bool last = i == 36;
            if (y >= b.bin_lower(i) - 1e-15 && (y < b.bin_lower(i + 1) || (last && y <= 1.0))) ++hits;
        }
        EXPECT_GE(hits, 1);
    }
    EXPECT_EQ(*b.try_bin(1.0), 36u);
    EXPECT_EQ(*b.try_bin(-1.0), 0u);
}

TEST(Binning, Errors) {
    EXPECT_THROW(LabelBinning(1.0, 1.0, 10), Error);
    EXPECT_THROW(LabelBinning(-1.0, 1.0, 1), Error);
    const LabelBinning b(-1.0, 1.0, 4);
    try {
        bin_labels(make_sequence({0.0, 1.5}), b);
        FAIL() << "expected out-of-range error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::kData);
        EXPECT_NE(std::string(e.what()).find("frame 1"), std::string::npos);
    }
    try {
        bin_labels(Sequence{"empty", {}}, b);
        FAIL() << "expected empty error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("empty sequence"), std::string::npos);
    }
    const auto clamped = bin_labels(make_sequence({-3.0, 1.5}), b, RangePolicy::kClamp);
    EXPECT_EQ(clamped.counts, (std::vector<double>{1, 0, 0, 1}));
}

TEST(Kernel, DefaultValenceKernel) {
    const auto k = build_kernel(0.06, 0.02, 0.02);
    EXPECT_EQ(k.offsets, (std::vector<int>{-1, 0, 1}));
    // exp(-0.5) = 0.60653; normalized over 1 + 2 exp(-0.5)
    EXPECT_NEAR(k.weights[0], 0.274068619061197, 1e-12);
    EXPECT_NEAR(k.weights[1], 0.451862761877606, 1e-12);
    EXPECT_NEAR(k.weights[2], 0.274068619061197, 1e-12);
}

TEST(Kernel, BinWideKernelIsIdentity) {
    const auto k = build_kernel(0.02, 0.02, 2.0 / 100.0);
    EXPECT_EQ(k.offsets, (std::vector<int>{0}));
    EXPECT_EQ(k.weights, (std::vector<double>{1.0}));
}

TEST(Kernel, SymmetricNormalizedPeaked) {
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
        const double bw = 0.005 + 0.1 * rng.uniform();
        const double delta = bw * (1.0 + 20.0 * rng.uniform());
        const double sigma = 0.001 + 0.2 * rng.uniform();
        const auto k = build_kernel(delta, sigma, bw);
        double sum = 0.0;
        for (double w : k.weights) sum += w;
        EXPECT_NEAR(sum, 1.0, 1e-12);
        const std::size_t n = k.weights.size();
        for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(k.weights[i], k.weights[n - 1 - i]);
        EXPECT_EQ(*std::max_element(k.weights.begin(), k.weights.end()), k.weights[n / 2]);
        EXPECT_LE(std::abs(k.half_width() * bw), delta / 2 + 1e-9);
    }
}

TEST(Kernel, NarrowerThanBinRejected) {
    try {
        build_kernel(0.01, 0.02, 0.02);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(std::string(e.what()), "kernel narrower than one bin");
        EXPECT_EQ(e.kind(), ErrorKind::kUsage);
    }
    EXPECT_THROW(build_kernel(0.06, 0.0, 0.02), Error);
}

namespace {
LabelHistogram hist3(std::vector<double> c) { return {LabelBinning(0.0, 3.0, 3), std::move(c)}; }
DiscreteKernel quarter_kernel() { return {3.0, 1.0, 1.0, {-1, 0, 1}, {0.25, 0.5, 0.25}}; }
}  // namespace

TEST(Convolve, SpikeSpreadsByKernel) {
    EXPECT_EQ(convolve(hist3({0, 4, 0}), quarter_kernel()).counts, (std::vector<double>{1, 2, 1}));
}

TEST(Convolve, IdentityKernelIsExact) {
    Rng rng(11);
    const LabelBinning b(-1, 1, 50);
    for (int t = 0; t < 20; ++t) {
        LabelHistogram h{b, ulda::testing::random_counts(rng, 50)};
        EXPECT_EQ(convolve(h, DiscreteKernel::identity()).counts, h.counts);
        EXPECT_EQ(convolve(h, build_kernel(b.bin_width(), 0.1, b.bin_width())).counts, h.counts);
    }
}

TEST(Convolve, BoundaryMassConserved) {
    const auto out = convolve(hist3({4, 0, 0}), quarter_kernel());
    EXPECT_NEAR(out.total_mass(), 4.0, 1e-9);
    EXPECT_NEAR(out.counts[0], 8.0 / 3.0, 1e-12);
    EXPECT_NEAR(out.counts[1], 4.0 / 3.0, 1e-12);
}

TEST(Convolve, MatchesNaiveOracleAndConservesMass) {
    Rng rng(2024);
    for (int t = 0; t < 100; ++t) {
        const std::size_t bins = 5 + rng.below(120);
        const LabelBinning b(-1, 1, bins);
        const double bw = b.bin_width();
        const auto k = build_kernel(bw * (1 + rng.below(9)), bw * (0.3 + 3 * rng.uniform()), bw);
        if (k.half_width() >= static_cast<int>(bins)) continue;
        LabelHistogram h{b, ulda::testing::random_counts(rng, bins)};
        h.counts.front() += 30;  // boundary-heavy
        const auto out = convolve(h, k);
        const auto oracle = naive_convolve(h.counts, k.offsets, k.weights);
        for (std::size_t i = 0; i < bins; ++i) ASSERT_NEAR(out.counts[i], oracle[i], 1e-12);
        EXPECT_NEAR(out.total_mass(), h.total_mass(), 1e-9);
    }
}

TEST(Convolve, SmoothingNeverRaisesSpike) {
    const LabelBinning b(-1, 1, 40);
    for (std::size_t pos : {0u, 1u, 20u, 39u}) {
        for (double delta : {0.1, 0.3, 0.5}) {
            LabelHistogram h{b, std::vector<double>(40, 0.0)};
            h.counts[pos] = 17;
            const auto out = convolve(h, build_kernel(delta, 0.05, b.bin_width()));
            EXPECT_LE(*std::max_element(out.counts.begin(), out.counts.end()), 17.0 + 1e-12);
        }
    }
}

TEST(Convolve, RejectsOversizedKernel) {
    EXPECT_THROW(convolve(hist3({1, 1, 1}), DiscreteKernel{7, 1, 1, {-3, -2, -1, 0, 1, 2, 3}, {.1, .1, .1, .4, .1, .1, .1}}),
                 Error);
}

TEST(Plan, UnchangedHistogramHasNoWork) {
    const LabelHistogram h{LabelBinning(0, 2, 2), {1, 2}};
    const auto plan = make_plan(h, h);
    for (const auto& e : plan.entries) {
        EXPECT_EQ(e.delta, 0.0);
        EXPECT_EQ(e.oversample_count(), 0u);
        EXPECT_FALSE(e.undersample());
    }
}

TEST(Plan, FromSpikeConvolution) {
    const auto before = hist3({0, 4, 0});
    const auto plan = make_plan(before, convolve(before, quarter_kernel()));
    ASSERT_EQ(plan.entries.size(), 3u);
    EXPECT_EQ(plan.entries[0].oversample_count(), 1u);
    EXPECT_EQ(plan.entries[2].oversample_count(), 1u);
    EXPECT_EQ(plan.entries[1].oversample_count(), 0u);
    EXPECT_TRUE(plan.entries[1].undersample());
    EXPECT_FALSE(plan.entries[0].undersample());
    EXPECT_EQ(plan.total_oversample(), 2u);
    EXPECT_EQ(plan.realizable_oversample(), 0u);  // both targets are empty bins
}

TEST(Plan, RoundsHalfUp) {
    EXPECT_EQ((PlanEntry{0, 1, 1.4, 0.4}.oversample_count()), 0u);
    EXPECT_EQ((PlanEntry{0, 1, 1.5, 0.5}.oversample_count()), 1u);
    EXPECT_EQ((PlanEntry{0, 1, 3.49, 2.49}.oversample_count()), 2u);
    EXPECT_EQ((PlanEntry{0, 3, 1, -2}.oversample_count()), 0u);
}

TEST(Plan, BinningMismatch) {
    EXPECT_THROW(make_plan(hist3({1, 1, 1}), LabelHistogram{LabelBinning(0, 4, 3), {1, 1, 1}}), Error);
}
