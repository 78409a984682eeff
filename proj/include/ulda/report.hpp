#pragma once

// Serialization of experiment reports (JSON) and their figures (SVG).

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ulda/config.hpp"
#include "ulda/harness.hpp"
#include "ulda/svg.hpp"

namespace ulda {

namespace detail {

inline nlohmann::ordered_json real_or_null(double v) {
    if (std::isnan(v) || std::isinf(v)) return nullptr;
    return v;
}

inline nlohmann::ordered_json reals(const std::vector<double>& xs) {
    auto a = nlohmann::ordered_json::array();
    for (double x : xs) a.push_back(real_or_null(x));
    return a;
}

inline nlohmann::ordered_json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

inline nlohmann::ordered_json regions_json(const RegionAnalysis& ra) {
    nlohmann::ordered_json j;
    j["threshold"] = ra.threshold;
    j["no_dense_region"] = ra.no_dense_region;
    const char* names[] = {"I", "II", "III"};
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& r = ra.regions[k];
        j["regions"].push_back({{"name", names[k]},
                                {"first_bin", r.first_bin},
                                {"end_bin", r.end_bin},
                                {"populated_bins", r.populated},
                                {"mean_mse", real_or_null(r.mean_mse)},
                                {"mse_range", real_or_null(r.mse_range)}});
    }
    return j;
}

}  // namespace detail

/// `echo` is the configuration that produced the report, stored verbatim.
inline nlohmann::ordered_json report_json(const ExperimentReport& rep, const nlohmann::ordered_json& echo) {
    nlohmann::ordered_json j;
    j["config"] = echo;
    j["seeds"] = rep.seeds;
    j["distribution_pcc"] = {{"raw_train_vs_test", detail::mean_std_json(rep.dist_pcc_raw)},
                             {"convolved_train_vs_test", detail::mean_std_json(rep.dist_pcc_convolved)}};
    j["histograms"] = {{"train_raw", rep.train_raw.counts},
                       {"train_convolved", rep.train_convolved.counts},
                       {"test_utopia", rep.test_utopia.counts}};
    for (const auto& s : rep.strategies) {
        nlohmann::ordered_json sj;
        sj["name"] = s.name;
        sj["mse"] = detail::mean_std_json(s.mse);
        sj["pcc"] = detail::mean_std_json(s.pcc);
        sj["mean_bin_range"] = detail::mean_std_json(s.mean_bin_range);
        sj["bin_mse"] = detail::reals(s.bin_mse);
        sj["bin_mse_min"] = detail::reals(s.bin_mse_lo);
        sj["bin_mse_max"] = detail::reals(s.bin_mse_hi);
        sj["region_analysis"] = detail::regions_json(s.regions);
        j["strategies"].push_back(std::move(sj));
    }
    return j;
}

inline std::vector<double> bin_centers(const LabelBinning& b) {
    std::vector<double> x;
    for (std::size_t i = 0; i < b.bin_count(); ++i) x.push_back(b.bin_center(i));
    return x;
}

inline std::vector<double> normalized(const std::vector<double>& counts) {
    double s = 0.0;
    for (double c : counts) s += c;
    std::vector<double> out(counts);
    if (s > 0.0)
        for (auto& v : out) v /= s;
    return out;
}

/// Two panels: label distributions (raw train, convolved train, test) and
/// per-bin MSE with min/max ribbons for each strategy.
inline std::string report_svg(const ExperimentReport& rep) {
    const auto x = bin_centers(rep.train_raw.binning);
    svg::Plot dist("Label distributions", "label", "density");
    dist.line("train (raw)", "#d62728", x, normalized(rep.train_raw.counts))
        .line("train (convolved)", "#1f77b4", x, normalized(rep.train_convolved.counts))
        .line("test (utopia)", "#e3b505", x, normalized(rep.test_utopia.counts));

    svg::Plot err("Per-bin test MSE", "label", "squared error");
    const char* palette[] = {"#d62728", "#2ca02c", "#1f77b4", "#9467bd", "#8c564b", "#e377c2"};
    for (std::size_t k = 0; k < rep.strategies.size(); ++k) {
        const auto& s = rep.strategies[k];
        const std::string color = palette[k % 6];
        err.ribbon("", color, x, s.bin_mse_lo, s.bin_mse_hi, 0.15);
        err.line(s.name, color, x, s.bin_mse);
    }
    return svg::document({dist, err});
}

inline std::string histogram_svg(const std::string& title, const LabelHistogram& h) {
    svg::Plot p(title, "label", "frames");
    p.bars("frames", "#d62728", bin_centers(h.binning), h.counts);
    return svg::document({p});
}

inline std::string overlay_svg(const std::string& title, const LabelHistogram& before, const LabelHistogram& after) {
    svg::Plot p(title, "label", "frames");
    const auto x = bin_centers(before.binning);
    p.bars("original", "#d62728", x, before.counts, 0.5).line("convolved", "#1f77b4", x, after.counts);
    return svg::document({p});
}

}  // namespace ulda
