#pragma once

// Desk-scale weighted regressors used by the evaluation harness.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "ulda/dataset.hpp"
#include "ulda/error.hpp"

namespace ulda {

struct LinearModel {
    Eigen::VectorXd coef;
    double intercept = 0.0;

    double predict(const Feature& f) const {
        double acc = intercept;
        for (Eigen::Index j = 0; j < coef.size(); ++j) acc += coef[j] * f[static_cast<std::size_t>(j)];
        return acc;
    }

    std::vector<double> predict(const std::vector<Feature>& xs) const {
        std::vector<double> out;
        out.reserve(xs.size());
        for (const auto& x : xs) out.push_back(predict(x));
        return out;
    }
};

/// Minimizes sum_i w_i (y_i - theta.f_i - b)^2 + penalty * |theta|^2 in closed
/// form. Weights are first rescaled to sum to the sample count, so the penalty
/// has the same strength for any weight scale. The intercept b is unpenalized
/// and fixed at 0 when `fit_intercept` is false.
inline LinearModel fit_weighted_ridge(const std::vector<Feature>& features, std::span<const double> labels,
                                      std::span<const double> weights, double penalty, bool fit_intercept = true) {
    const std::size_t m = features.size();
    if (m == 0) data_error("ridge: empty training set");
    if (labels.size() != m || weights.size() != m) data_error("ridge: length mismatch");
    if (!(penalty >= 0.0)) usage_error("ridge: penalty must be >= 0");
    const std::size_t d = features.front().size();
    const auto dim = static_cast<Eigen::Index>(d);

    double wsum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) data_error("ridge: negative or non-finite weight");
        wsum += w;
    }
    if (!(wsum > 0.0)) data_error("ridge: weights sum to zero");
    const double wscale = static_cast<double>(m) / wsum;

    Eigen::VectorXd xbar = Eigen::VectorXd::Zero(dim);
    double ybar = 0.0;
    if (fit_intercept) {
        for (std::size_t i = 0; i < m; ++i) {
            const double w = weights[i] * wscale;
            xbar += w * Eigen::Map<const Eigen::VectorXd>(features[i].data(), dim);
            ybar += w * labels[i];
        }
        xbar /= static_cast<double>(m);
        ybar /= static_cast<double>(m);
    }

    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < m; ++i) {
        if (features[i].size() != d) data_error("ridge: feature dimension mismatch");
        const double w = weights[i] * wscale;
        const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(features[i].data(), dim) - xbar;
        gram.selfadjointView<Eigen::Lower>().rankUpdate(x, w);
        rhs += w * (labels[i] - ybar) * x;
    }
    gram = gram.selfadjointView<Eigen::Lower>();
    gram.diagonal().array() += penalty;

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const double scale = std::max(1.0, gram.diagonal().cwiseAbs().maxCoeff());
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().cwiseAbs().minCoeff() <= 1e-12 * scale)
        numeric_error("singular normal equations");

    LinearModel model;
    model.coef = ldlt.solve(rhs);
    model.intercept = fit_intercept ? ybar - model.coef.dot(xbar) : 0.0;
    return model;
}

inline LinearModel fit_ridge(const std::vector<Feature>& features, std::span<const double> labels, double penalty,
                             bool fit_intercept = true) {
    const std::vector<double> ones(features.size(), 1.0);
    return fit_weighted_ridge(features, labels, ones, penalty, fit_intercept);
}

/// k nearest neighbours (Euclidean, ties by training index); prediction is
/// the weight-weighted mean of the neighbours' labels.
class KnnModel {
public:
    KnnModel(std::vector<Feature> features, std::vector<double> labels, std::vector<double> weights, std::size_t k)
        : features_(std::move(features)), labels_(std::move(labels)), weights_(std::move(weights)), k_(k) {
        if (features_.empty()) data_error("knn: empty training set");
        if (labels_.size() != features_.size() || weights_.size() != features_.size())
            data_error("knn: length mismatch");
        if (k_ < 1 || k_ > features_.size()) usage_error("knn: k must be in [1, training size]");
    }

    double predict(const Feature& query) const {
        std::vector<std::pair<double, std::size_t>> dist;
        dist.reserve(features_.size());
        for (std::size_t i = 0; i < features_.size(); ++i) {
            const auto& f = features_[i];
            if (f.size() != query.size()) data_error("knn: feature dimension mismatch");
            double d2 = 0.0;
            for (std::size_t j = 0; j < f.size(); ++j) d2 += (f[j] - query[j]) * (f[j] - query[j]);
            dist.emplace_back(d2, i);
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
        double num = 0.0, den = 0.0, plain = 0.0;
        for (std::size_t r = 0; r < k_; ++r) {
            const auto i = dist[r].second;
            num += weights_[i] * labels_[i];
            den += weights_[i];
            plain += labels_[i];
        }
        return den > 0.0 ? num / den : plain / static_cast<double>(k_);
    }

    std::vector<double> predict(const std::vector<Feature>& xs) const {
        std::vector<double> out;
        out.reserve(xs.size());
        for (const auto& x : xs) out.push_back(predict(x));
        return out;
    }

private:
    std::vector<Feature> features_;
    std::vector<double> labels_;
    std::vector<double> weights_;
    std::size_t k_;
};

inline KnnModel fit_weighted_knn(std::vector<Feature> features, std::vector<double> labels,
                                 std::vector<double> weights, std::size_t k) {
    return KnnModel(std::move(features), std::move(labels), std::move(weights), k);
}

}  // namespace ulda
