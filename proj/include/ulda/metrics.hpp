#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "ulda/error.hpp"
#include "ulda/label_dist.hpp"

namespace ulda {

struct Metrics {
    double mse = 0.0;
    double pcc = 0.0;
};

inline double mse(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) data_error("mse: length mismatch");
    if (y.empty()) data_error("mse: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    return acc / static_cast<double>(y.size());
}

inline double pcc(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) data_error("pcc: length mismatch");
    if (y.size() < 2) data_error("pcc: need at least two values");
    const auto n = static_cast<double>(y.size());
    double my = 0.0, mh = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        my += y[i];
        mh += yhat[i];
    }
    my /= n;
    mh /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double a = y[i] - my;
        const double b = yhat[i] - mh;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) numeric_error("degenerate correlation");
    return sxy / std::sqrt(sxx * syy);
}

inline Metrics evaluate(std::span<const double> y, std::span<const double> yhat) { return {mse(y, yhat), pcc(y, yhat)}; }

/// Pearson correlation of two histograms' count vectors.
inline double distribution_pcc(const LabelHistogram& a, const LabelHistogram& b) {
    if (!(a.binning == b.binning)) data_error("histogram binning mismatch");
    return pcc(a.counts, b.counts);
}

}  // namespace ulda
