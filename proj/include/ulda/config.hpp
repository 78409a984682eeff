#pragma once

// Run configuration shared by the CLI subcommands. Values come from, in
// increasing precedence: built-in defaults, a JSON config file, the ULDA_SEED
// environment variable (seed only), and command-line flags.

#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ulda/annotator_sim.hpp"
#include "ulda/error.hpp"
#include "ulda/harness.hpp"

namespace ulda {

struct RunConfig {
    std::size_t bins = 100;
    double kernel_size = 0.06;
    double kernel_sigma = 0.02;
    std::size_t slice_threshold = 10;
    std::uint64_t seed = 0;
    bool clamp = false;  // clamp out-of-range labels instead of failing
    std::string regressor = "ridge";
    double ridge_penalty = 1e-3;
    std::size_t knn_k = 10;
    std::string scheme = "cwl";
    double region_threshold = 500.0;
    double region_fraction = 0.0;
    std::size_t repeats = 3;
    double train_fraction = 0.7;
    SimConfig sim;

    UldaParams ulda_params() const { return {bins, kernel_size, kernel_sigma, slice_threshold}; }

    RegressorConfig regressor_config() const {
        RegressorConfig rc;
        if (regressor == "ridge") rc.kind = RegressorKind::kRidge;
        else if (regressor == "knn") rc.kind = RegressorKind::kKnn;
        else usage_error("unknown regressor '" + regressor + "' (expected ridge or knn)");
        rc.ridge_penalty = ridge_penalty;
        rc.knn_k = knn_k;
        return rc;
    }

    ExperimentConfig experiment_config() const {
        ExperimentConfig ec;
        ec.sim = sim;
        ec.sim.seed = seed;
        ec.ulda = ulda_params();
        ec.regressor = regressor_config();
        ec.repeats = repeats;
        ec.train_fraction = train_fraction;
        ec.region_threshold = region_threshold;
        ec.region_fraction = region_fraction;
        ec.seed = seed;
        return ec;
    }
};

namespace detail {

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline void apply_json(const nlohmann::json& j, SimConfig& sim) {
    using detail::read_key;
    read_key(j, "sequence_count", sim.sequence_count);
    read_key(j, "frames_per_sequence", sim.frames_per_sequence);
    read_key(j, "feature_dim", sim.feature_dim);
    read_key(j, "annotator_count", sim.annotator_count);
    read_key(j, "vote_std", sim.vote_std);
    read_key(j, "label_min", sim.label_min);
    read_key(j, "label_max", sim.label_max);
    read_key(j, "smoothness", sim.smoothness);
    read_key(j, "label_spread", sim.label_spread);
    read_key(j, "feature_noise", sim.feature_noise);
    read_key(j, "clamp_observed", sim.clamp_observed);
}

inline void apply_json(const nlohmann::json& j, RunConfig& cfg) {
    using detail::read_key;
    try {
        read_key(j, "bins", cfg.bins);
        read_key(j, "kernel_size", cfg.kernel_size);
        read_key(j, "kernel_sigma", cfg.kernel_sigma);
        read_key(j, "slice_threshold", cfg.slice_threshold);
        read_key(j, "seed", cfg.seed);
        read_key(j, "clamp", cfg.clamp);
        read_key(j, "regressor", cfg.regressor);
        read_key(j, "ridge_penalty", cfg.ridge_penalty);
        read_key(j, "knn_k", cfg.knn_k);
        read_key(j, "scheme", cfg.scheme);
        read_key(j, "region_threshold", cfg.region_threshold);
        read_key(j, "region_fraction", cfg.region_fraction);
        read_key(j, "repeats", cfg.repeats);
        read_key(j, "train_fraction", cfg.train_fraction);
        if (j.contains("sim")) apply_json(j.at("sim"), cfg.sim);
    } catch (const nlohmann::json::exception& e) {
        usage_error(std::string("config: ") + e.what());
    }
}

inline nlohmann::ordered_json to_json(const SimConfig& s) {
    nlohmann::ordered_json j;
    j["sequence_count"] = s.sequence_count;
    j["frames_per_sequence"] = s.frames_per_sequence;
    j["feature_dim"] = s.feature_dim;
    j["annotator_count"] = s.annotator_count;
    j["vote_std"] = s.vote_std;
    j["label_min"] = s.label_min;
    j["label_max"] = s.label_max;
    j["smoothness"] = s.smoothness;
    j["label_spread"] = s.label_spread;
    j["feature_noise"] = s.feature_noise;
    j["clamp_observed"] = s.clamp_observed;
    j["seed"] = s.seed;
    return j;
}

inline nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["bins"] = c.bins;
    j["kernel_size"] = c.kernel_size;
    j["kernel_sigma"] = c.kernel_sigma;
    j["slice_threshold"] = c.slice_threshold;
    j["seed"] = c.seed;
    j["clamp"] = c.clamp;
    j["regressor"] = c.regressor;
    j["ridge_penalty"] = c.ridge_penalty;
    j["knn_k"] = c.knn_k;
    j["scheme"] = c.scheme;
    j["region_threshold"] = c.region_threshold;
    j["region_fraction"] = c.region_fraction;
    j["repeats"] = c.repeats;
    j["train_fraction"] = c.train_fraction;
    j["sim"] = to_json(c.sim);
    return j;
}

/// Seed from ULDA_SEED, if set and valid.
inline std::optional<std::uint64_t> seed_from_env() {
    const char* v = std::getenv("ULDA_SEED");
    if (!v || !*v) return std::nullopt;
    char* end = nullptr;
    const auto seed = std::strtoull(v, &end, 10);
    if (end == v || *end != '\0') usage_error(std::string("ULDA_SEED is not an unsigned integer: ") + v);
    return seed;
}

}  // namespace ulda
