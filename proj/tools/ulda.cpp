// ulda: label-distribution debiasing for time-series regression datasets.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ulda/ulda.hpp"

namespace fs = std::filesystem;
using namespace ulda;

namespace {

struct Flags {
    std::optional<std::string> config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> bins;
    std::optional<double> kernel_size;
    std::optional<double> kernel_sigma;
    std::optional<std::size_t> threshold;
    bool clamp = false;

    // simulate / bench
    std::optional<std::size_t> sequences, frames, dim, annotators;
    std::optional<double> vote_std, smoothness, feature_noise;

    // bench
    std::optional<std::size_t> repeats;
    std::optional<std::string> regressor;
    std::optional<double> ridge_penalty;
    std::optional<std::size_t> knn_k;
    std::optional<double> region_threshold, region_fraction;
    std::string strategies = "baseline,cwl,tns+cwl";

    // weights
    std::optional<std::string> scheme;

    std::string data;
    std::string out;
};

template <typename T>
void set_if(const std::optional<T>& v, T& dst) {
    if (v) dst = *v;
}

RunConfig resolve(const Flags& f) {
    RunConfig cfg;
    if (f.config_file) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(io::read_file(*f.config_file));
        } catch (const nlohmann::json::parse_error& e) {
            usage_error(*f.config_file + ": " + e.what());
        } catch (const Error& e) {
            usage_error(e.what());
        }
        apply_json(j, cfg);
    }
    if (auto env = seed_from_env()) cfg.seed = *env;
    set_if(f.seed, cfg.seed);
    set_if(f.bins, cfg.bins);
    set_if(f.kernel_size, cfg.kernel_size);
    set_if(f.kernel_sigma, cfg.kernel_sigma);
    set_if(f.threshold, cfg.slice_threshold);
    if (f.clamp) cfg.clamp = true;
    set_if(f.sequences, cfg.sim.sequence_count);
    set_if(f.frames, cfg.sim.frames_per_sequence);
    set_if(f.dim, cfg.sim.feature_dim);
    set_if(f.annotators, cfg.sim.annotator_count);
    set_if(f.vote_std, cfg.sim.vote_std);
    set_if(f.smoothness, cfg.sim.smoothness);
    set_if(f.feature_noise, cfg.sim.feature_noise);
    set_if(f.repeats, cfg.repeats);
    set_if(f.regressor, cfg.regressor);
    set_if(f.ridge_penalty, cfg.ridge_penalty);
    set_if(f.knn_k, cfg.knn_k);
    set_if(f.region_threshold, cfg.region_threshold);
    set_if(f.region_fraction, cfg.region_fraction);
    set_if(f.scheme, cfg.scheme);
    cfg.sim.seed = cfg.seed;
    return cfg;
}

RangePolicy policy(const RunConfig& cfg) { return cfg.clamp ? RangePolicy::kClamp : RangePolicy::kStrict; }

LabelBinning binning_for(const SequenceDataset& ds, const RunConfig& cfg) {
    return LabelBinning(ds.label_min, ds.label_max, cfg.bins);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

int cmd_stats(const Flags& f) {
    const RunConfig cfg = resolve(f);
    const auto ds = io::read_dataset(f.data);
    const auto binning = binning_for(ds, cfg);
    std::vector<io::NamedHistogram> hists;
    std::vector<LabelHistogram> all;
    for (const auto& s : ds.sequences) {
        hists.push_back({s.id, bin_labels(s, binning, policy(cfg))});
        all.push_back(hists.back().hist);
    }
    const fs::path out(f.out);
    io::write_file_atomic(out / "histograms.csv", io::format_histograms_csv(hists));
    io::write_file_atomic(out / "label_distribution.svg",
                          histogram_svg("Label distribution (all sequences)", sum_histograms(all)));
    return 0;
}

int cmd_convolve(const Flags& f) {
    const RunConfig cfg = resolve(f);
    const auto ds = io::read_dataset(f.data);
    const auto binning = binning_for(ds, cfg);
    const auto kernel = build_kernel(cfg.kernel_size, cfg.kernel_sigma, binning.bin_width());
    std::vector<io::NamedHistogram> before, after;
    std::vector<std::pair<std::string, AugmentationPlan>> plans;
    std::vector<LabelHistogram> all_before, all_after;
    for (const auto& s : ds.sequences) {
        auto h = bin_labels(s, binning, policy(cfg));
        auto c = convolve(h, kernel);
        plans.emplace_back(s.id, make_plan(h, c));
        all_before.push_back(h);
        all_after.push_back(c);
        before.push_back({s.id, std::move(h)});
        after.push_back({s.id, std::move(c)});
    }
    const fs::path out(f.out);
    io::write_file_atomic(out / "before.csv", io::format_histograms_csv(before));
    io::write_file_atomic(out / "after.csv", io::format_histograms_csv(after));
    io::write_file_atomic(out / "plan.csv", io::format_plan_csv(plans));
    io::write_file_atomic(out / "convolution.svg", overlay_svg("Original vs convolved label distribution",
                                                               sum_histograms(all_before), sum_histograms(all_after)));
    return 0;
}

int cmd_augment(const Flags& f) {
    const RunConfig cfg = resolve(f);
    const auto ds = io::read_dataset(f.data);
    const auto binning = binning_for(ds, cfg);
    const auto kernel = build_kernel(cfg.kernel_size, cfg.kernel_sigma, binning.bin_width());
    AugmentParams ap;
    ap.slice_threshold = cfg.slice_threshold;
    ap.seed = cfg.seed;
    ap.range = policy(cfg);

    SequenceDataset out_ds{ds.feature_dim, ds.label_min, ds.label_max, {}};
    std::vector<ProvenanceRecord> provenance;
    std::size_t skipped = 0;
    for (const auto& s : ds.sequences) {
        const auto before = bin_labels(s, binning, ap.range);
        auto result = augment_sequence(s, make_plan(before, convolve(before, kernel)), ap);
        skipped += result.skipped_empty_bins;
        provenance.insert(provenance.end(), result.provenance.begin(), result.provenance.end());
        out_ds.sequences.push_back(std::move(result.sequence));
    }
    io::write_dataset(out_ds, f.out);
    io::write_file_atomic(fs::path(f.out) / "provenance.jsonl", io::format_provenance_jsonl(provenance));
    std::cerr << "augment: " << provenance.size() << " synthetic frames";
    if (skipped) std::cerr << ", " << skipped << " empty-bin targets skipped";
    std::cerr << "\n";
    return 0;
}

int cmd_weights(const Flags& f) {
    const RunConfig cfg = resolve(f);
    const auto ds = io::read_dataset(f.data);
    const auto binning = binning_for(ds, cfg);
    const auto kernel = build_kernel(cfg.kernel_size, cfg.kernel_sigma, binning.bin_width());
    std::vector<WeightScheme> schemes;
    if (cfg.scheme == "all")
        schemes = {WeightScheme::kCwl, WeightScheme::kInv, WeightScheme::kLds, WeightScheme::kDense,
                   WeightScheme::kUniform};
    else
        for (const auto& name : split_list(cfg.scheme)) schemes.push_back(parse_scheme(name));

    std::vector<io::ExtraColumns> extra;
    for (const auto& s : ds.sequences) {
        const auto before = bin_labels(s, binning, policy(cfg));
        const auto after = convolve(before, kernel);
        io::ExtraColumns cols;
        for (auto scheme : schemes)
            cols.emplace_back("w_" + std::string(scheme_name(scheme)),
                              compute_weights(scheme, before, after, kernel, s, policy(cfg)).weights);
        extra.push_back(std::move(cols));
    }
    io::write_dataset(ds, f.out, extra);
    return 0;
}

int cmd_simulate(const Flags& f) {
    const RunConfig cfg = resolve(f);
    const LabelBinning binning(cfg.sim.label_min, cfg.sim.label_max, cfg.bins);
    const auto corpus = simulate(cfg.sim, binning);
    io::write_dataset(corpus.observed, f.out);
    return 0;
}

int cmd_bench(const Flags& f) {
    const RunConfig cfg = resolve(f);
    ExperimentConfig ec = cfg.experiment_config();
    ec.strategies = split_list(f.strategies);
    for (const auto& s : ec.strategies) make_strategy(s);  // validate names early
    const auto report = run_experiment(ec);
    auto echo = to_json(cfg);
    echo["strategies"] = ec.strategies;
    const fs::path out(f.out);
    io::write_file_atomic(out / "report.json", report_json(report, echo).dump(2) + "\n");
    io::write_file_atomic(out / "bench.svg", report_svg(report));
    return 0;
}

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config_file, "JSON config file (flags override it)");
    sub->add_option("--seed", f.seed, "RNG seed (overrides ULDA_SEED)");
    sub->add_option("--bins", f.bins, "number of label bins b");
    sub->add_option("--kernel-size", f.kernel_size, "Gaussian kernel size delta (label units)");
    sub->add_option("--kernel-sigma", f.kernel_sigma, "Gaussian kernel sigma (label units)");
    sub->add_option("--threshold", f.threshold, "slice length threshold T");
    sub->add_flag("--clamp", f.clamp, "clamp out-of-range labels instead of failing");
}

void add_sim(CLI::App* sub, Flags& f) {
    sub->add_option("--sequences", f.sequences, "number of sequences");
    sub->add_option("--frames", f.frames, "frames per sequence");
    sub->add_option("--dim", f.dim, "feature dimension");
    sub->add_option("--annotators", f.annotators, "annotators per frame");
    sub->add_option("--vote-std", f.vote_std, "annotator vote standard deviation");
    sub->add_option("--smoothness", f.smoothness, "label curve correlation length (frames)");
    sub->add_option("--feature-noise", f.feature_noise, "feature noise standard deviation");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Label distribution debiasing for subjective time-series regression"};
    app.require_subcommand(1);
    Flags f;

    auto* stats = app.add_subcommand("stats", "per-sequence label histograms and distribution plot");
    auto* conv = app.add_subcommand("convolve", "original/convolved histograms, augmentation plan and overlay plot");
    auto* aug = app.add_subcommand("augment", "time-slice normal sampling; writes augmented dataset + provenance");
    auto* wts = app.add_subcommand("weights", "append per-frame weight columns");
    auto* sim = app.add_subcommand("simulate", "generate a synthetic annotated corpus");
    auto* bench = app.add_subcommand("bench", "run the synthetic experiment and write report + figure");

    for (auto* sub : {stats, conv, aug, wts}) {
        add_common(sub, f);
        sub->add_option("--data", f.data, "input dataset directory")->required();
        sub->add_option("--out", f.out, "output directory")->required();
    }
    wts->add_option("--scheme", f.scheme, "cwl, inv, lds, dense, uniform, a comma list, or all");
    for (auto* sub : {sim, bench}) {
        add_common(sub, f);
        add_sim(sub, f);
        sub->add_option("--out", f.out, "output directory")->required();
    }
    bench->add_option("--repeats", f.repeats, "corpora per run (seeds seed..seed+repeats-1)");
    bench->add_option("--regressor", f.regressor, "ridge or knn");
    bench->add_option("--ridge-penalty", f.ridge_penalty, "ridge penalty");
    bench->add_option("--knn-k", f.knn_k, "neighbours for knn");
    bench->add_option("--region-threshold", f.region_threshold, "count threshold for region II");
    bench->add_option("--region-fraction", f.region_fraction, "threshold as a fraction of the max count");
    bench->add_option("--strategies", f.strategies, "comma list of baseline,cwl,tns+cwl,inv,lds,dense");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (stats->parsed()) return cmd_stats(f);
        if (conv->parsed()) return cmd_convolve(f);
        if (aug->parsed()) return cmd_augment(f);
        if (wts->parsed()) return cmd_weights(f);
        if (sim->parsed()) return cmd_simulate(f);
        if (bench->parsed()) return cmd_bench(f);
    } catch (const Error& e) {
        std::cerr << "ulda: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "ulda: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::kData);
    }
    return 1;
}
