#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "ulda/cwl.hpp"

using namespace ulda;
using ulda::testing::make_sequence;

namespace {

const LabelBinning kTwo(0.0, 2.0, 2);
const LabelBinning kThree(0.0, 3.0, 3);

// Random sequence and its own histogram over `b`.
std::pair<Sequence, LabelHistogram> random_case(Rng& rng, const LabelBinning& b) {
    std::vector<double> labels(5 + rng.below(80));
    for (auto& y : labels) y = b.label_min() + (b.label_max() - b.label_min()) * std::pow(rng.uniform(), 3.0);
    auto seq = make_sequence(labels);
    auto h = bin_labels(seq, b);
    return {std::move(seq), std::move(h)};
}

}  // namespace

TEST(Cwl, RatioWeightsNormalizedToCount) {
    const auto seq = make_sequence({0.5, 1.5});
    const auto t = compute_cwl_weights(LabelHistogram{kTwo, {1, 1}}, LabelHistogram{kTwo, {2, 0.5}}, seq);
    EXPECT_NEAR(t.weights[0], 1.6, 1e-12);
    EXPECT_NEAR(t.weights[1], 0.4, 1e-12);
    EXPECT_EQ(t.scheme, WeightScheme::kCwl);
}

TEST(Cwl, UnchangedHistogramGivesUnitWeights) {
    Rng rng(12);
    const LabelBinning b(-1, 1, 30);
    for (int k = 0; k < 50; ++k) {
        const auto [seq, h] = random_case(rng, b);
        const auto t = compute_cwl_weights(h, h, seq);
        for (double w : t.weights) EXPECT_EQ(w, 1.0);
    }
}

TEST(Cwl, WeightedLossHandEvaluated) {
    const WeightTable t{"s", WeightScheme::kCwl, {1.6, 0.4}};
    EXPECT_NEAR(weighted_loss(std::vector<double>{0, 0}, std::vector<double>{0.5, 0}, t), 0.2, 1e-15);
}

TEST(Cwl, UniformLossIsMse) {
    Rng rng(3);
    for (int k = 0; k < 100; ++k) {
        const std::size_t m = 1 + rng.below(100);
        std::vector<double> p(m), y(m);
        double mse = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            p[i] = rng.normal();
            y[i] = rng.normal();
            mse += (p[i] - y[i]) * (p[i] - y[i]);
        }
        mse /= static_cast<double>(m);
        const auto seq = make_sequence(std::vector<double>(m, 0.0));
        EXPECT_NEAR(weighted_loss(p, y, uniform_weights(seq)), mse, 1e-12);
    }
}

TEST(Cwl, LossLengthMismatch) {
    const WeightTable t{"s", WeightScheme::kUniform, {1.0, 1.0}};
    EXPECT_THROW(weighted_loss(std::vector<double>{0}, std::vector<double>{0, 0}, t), Error);
}

TEST(Inv, HandEvaluated) {
    // four frames in bin 1, one in bin 2: raw 1/4 and 1; normalized to sum 5
    const auto seq = make_sequence({1.5, 1.5, 1.5, 1.5, 2.5});
    const auto t = compute_inv_weights(LabelHistogram{kThree, {0, 4, 1}}, seq);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(t.weights[static_cast<std::size_t>(i)], 0.625, 1e-12);
    EXPECT_NEAR(t.weights[4], 2.5, 1e-12);
}

TEST(Lds, HandEvaluated) {
    // smoothed counts [1, 7/3, 5/3]; raw 3/7 and 3/5
    const auto seq = make_sequence({1.5, 1.5, 1.5, 1.5, 2.5});
    const DiscreteKernel k{3.0, 1.0, 1.0, {-1, 0, 1}, {0.25, 0.5, 0.25}};
    const auto t = compute_lds_weights(LabelHistogram{kThree, {0, 4, 1}}, k, seq);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(t.weights[static_cast<std::size_t>(i)], 0.925925925925926, 1e-12);
    EXPECT_NEAR(t.weights[4], 1.2962962962962967, 1e-12);
}

TEST(Dense, HandEvaluated) {
    const std::vector<double> density{0.8, 0.2};
    const std::vector<std::size_t> bins{0, 1};
    const auto w = dense_weights_from_density(density, bins);
    EXPECT_NEAR(w[0], 0.4, 1e-12);
    EXPECT_NEAR(w[1], 1.6, 1e-12);
}

TEST(Dense, AllMassInOneBinFallsBackToUniform) {
    const std::vector<double> density{1.0, 0.0};
    const std::vector<std::size_t> bins{0, 0, 0};
    EXPECT_EQ(dense_weights_from_density(density, bins), (std::vector<double>{1, 1, 1}));
}

TEST(Schemes, SumToFrameCount) {
    Rng rng(101);
    const LabelBinning b(-1, 1, 50);
    const auto kernel = build_kernel(0.2, 0.05, b.bin_width());
    for (int k = 0; k < 100; ++k) {
        const auto [seq, h] = random_case(rng, b);
        const auto after = convolve(h, kernel);
        for (auto scheme : {WeightScheme::kCwl, WeightScheme::kInv, WeightScheme::kLds, WeightScheme::kDense,
                            WeightScheme::kUniform}) {
            const auto t = compute_weights(scheme, h, after, kernel, seq);
            ASSERT_EQ(t.weights.size(), seq.size());
            EXPECT_NEAR(t.sum(), static_cast<double>(seq.size()), 1e-9) << scheme_name(scheme);
            for (double w : t.weights) EXPECT_GE(w, 0.0);
        }
    }
}

TEST(Schemes, InvariantToHistogramScale) {
    Rng rng(202);
    const LabelBinning b(-1, 1, 40);
    const auto kernel = build_kernel(0.2, 0.05, b.bin_width());
    for (int k = 0; k < 50; ++k) {
        const auto [seq, h] = random_case(rng, b);
        const auto after = convolve(h, kernel);
        const double c = 0.5 + 10.0 * rng.uniform();
        LabelHistogram hs = h, as = after;
        for (auto& v : hs.counts) v *= c;
        for (auto& v : as.counts) v *= c;
        // the frame-count check ties `before` to the sequence, so scale only the CWL target
        const auto a = compute_cwl_weights(h, after, seq);
        const auto s = compute_cwl_weights(h, as, seq);
        for (std::size_t i = 0; i < seq.size(); ++i) EXPECT_NEAR(a.weights[i], s.weights[i], 1e-12);
        const auto r = detail::frame_bins(h, seq, RangePolicy::kStrict);
        std::vector<double> raw, raw_scaled;
        for (auto bin : r) {
            raw.push_back(1.0 / h.counts[bin]);
            raw_scaled.push_back(1.0 / hs.counts[bin]);
        }
        const auto n1 = detail::normalize_to_count(raw), n2 = detail::normalize_to_count(raw_scaled);
        for (std::size_t i = 0; i < n1.size(); ++i) EXPECT_NEAR(n1[i], n2[i], 1e-12);
    }
}

TEST(Cwl, RaisedTargetRaisesWeight) {
    const auto seq = make_sequence({0.5, 0.5, 1.5, 2.5});
    const LabelHistogram before{kThree, {2, 1, 1}};
    const auto base = compute_cwl_weights(before, LabelHistogram{kThree, {2, 1, 1}}, seq);
    const auto raised = compute_cwl_weights(before, LabelHistogram{kThree, {2, 3, 1}}, seq);
    EXPECT_GT(raised.weights[2], base.weights[2]);
    EXPECT_LT(raised.weights[0], base.weights[0]);
}

TEST(Schemes, HistogramMismatchRejected) {
    const auto seq = make_sequence({0.5, 1.5});
    EXPECT_THROW(compute_inv_weights(LabelHistogram{kTwo, {1, 2}}, seq), Error);
    EXPECT_THROW(compute_inv_weights(LabelHistogram{kTwo, {2, 0}}, seq), Error);
    EXPECT_THROW(compute_cwl_weights(LabelHistogram{kTwo, {1, 1}}, LabelHistogram{kThree, {1, 1, 1}}, seq), Error);
}

TEST(Schemes, NamesRoundTrip) {
    for (auto s : {WeightScheme::kCwl, WeightScheme::kInv, WeightScheme::kLds, WeightScheme::kDense,
                   WeightScheme::kUniform})
        EXPECT_EQ(parse_scheme(scheme_name(s)), s);
    EXPECT_THROW(parse_scheme("bogus"), Error);
}
