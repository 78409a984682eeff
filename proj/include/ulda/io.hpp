#pragma once

// On-disk formats.
//
// A dataset is a directory holding manifest.json plus one CSV per sequence:
//
//   t,label[,utopia_label],f0,...,f{d-1}[,w_<scheme>...]
//
// Numbers are written in shortest round-trip form, so reading back a written
// dataset reproduces it exactly.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ulda/cwl.hpp"
#include "ulda/dataset.hpp"
#include "ulda/error.hpp"
#include "ulda/label_dist.hpp"
#include "ulda/tns.hpp"

namespace ulda::io {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

inline constexpr std::string_view kManifestName = "manifest.json";

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int precision) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, precision);
    return std::string(buf, res.ptr);
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) data_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes to a temporary sibling and renames it into place.
inline void write_file_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) data_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) data_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) data_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// CSV helpers

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline std::vector<std::pair<std::size_t, std::string_view>> lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string_view>> out;
    std::size_t pos = 0, number = 1;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = trim(text.substr(pos, nl - pos));
        if (!line.empty()) out.emplace_back(number, line);
        pos = nl + 1;
        ++number;
    }
    return out;
}

[[noreturn]] inline void fail_at(const std::string& where, std::size_t line, const std::string& what) {
    data_error(where + ":" + std::to_string(line) + ": " + what);
}

inline double parse_real(std::string_view field, const std::string& where, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size() || field.empty())
        fail_at(where, line, "invalid number '" + std::string(field) + "'");
    if (!std::isfinite(v)) fail_at(where, line, "non-finite value '" + std::string(field) + "'");
    return v;
}

inline std::int64_t parse_int(std::string_view field, const std::string& where, std::size_t line) {
    std::int64_t v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size() || field.empty())
        fail_at(where, line, "invalid integer '" + std::string(field) + "'");
    return v;
}

}  // namespace detail

/// Extra per-frame columns, e.g. weight tables ("w_cwl" -> values).
using ExtraColumns = std::vector<std::pair<std::string, std::vector<double>>>;

inline std::string format_sequence_csv(const Sequence& seq, std::size_t feature_dim, bool with_utopia,
                                       const ExtraColumns& extra = {}) {
    std::string out = "t,label";
    if (with_utopia) out += ",utopia_label";
    for (std::size_t j = 0; j < feature_dim; ++j) out += ",f" + std::to_string(j);
    for (const auto& [name, values] : extra) {
        if (values.size() != seq.size()) usage_error("extra column '" + name + "' length mismatch");
        out += "," + name;
    }
    out += '\n';
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const auto& f = seq.frames[i];
        if (f.features.size() != feature_dim) data_error("sequence '" + seq.id + "': feature dimension mismatch");
        out += std::to_string(f.t);
        out += ',';
        out += format_double(f.label);
        if (with_utopia) {
            if (!f.utopia_label) data_error("sequence '" + seq.id + "': missing utopia label");
            out += ',';
            out += format_double(*f.utopia_label);
        }
        for (double v : f.features) {
            out += ',';
            out += format_double(v);
        }
        for (const auto& col : extra) {
            out += ',';
            out += format_double(col.second[i]);
        }
        out += '\n';
    }
    return out;
}

/// Parses one sequence file. `where` names the file in diagnostics.
inline Sequence parse_sequence_csv(std::string_view text, std::size_t feature_dim, const std::string& id,
                                   const std::string& where, ExtraColumns* extra = nullptr) {
    const auto rows = detail::lines(text);
    if (rows.empty()) data_error(where + ": empty file");
    const auto header = detail::split_fields(rows.front().second);
    const std::size_t hline = rows.front().first;
    if (header.size() < 2 || header[0] != "t" || header[1] != "label")
        detail::fail_at(where, hline, "header must start with 't,label'");
    std::size_t col = 2;
    const bool with_utopia = header.size() > 2 && header[2] == "utopia_label";
    if (with_utopia) ++col;
    const std::size_t first_feature = col;
    std::size_t d = 0;
    while (col < header.size() && header[col] == "f" + std::to_string(d)) {
        ++d;
        ++col;
    }
    if (d != feature_dim)
        detail::fail_at(where, hline,
                        "found " + std::to_string(d) + " feature columns, manifest declares " +
                            std::to_string(feature_dim));
    std::vector<std::string> extra_names;
    for (; col < header.size(); ++col) {
        if (header[col].substr(0, 2) != "w_") detail::fail_at(where, hline, "unexpected column '" + std::string(header[col]) + "'");
        extra_names.emplace_back(header[col]);
    }
    ExtraColumns cols;
    for (const auto& n : extra_names) cols.emplace_back(n, std::vector<double>{});

    Sequence seq{id, {}};
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto [line, content] = rows[r];
        const auto fields = detail::split_fields(content);
        if (fields.size() != header.size())
            detail::fail_at(where, line,
                            "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
        Frame f;
        f.t = detail::parse_int(fields[0], where, line);
        if (!seq.frames.empty() && f.t <= seq.frames.back().t)
            detail::fail_at(where, line, "t must be strictly increasing");
        f.label = detail::parse_real(fields[1], where, line);
        if (with_utopia) f.utopia_label = detail::parse_real(fields[2], where, line);
        f.features.reserve(d);
        for (std::size_t j = 0; j < d; ++j) f.features.push_back(detail::parse_real(fields[first_feature + j], where, line));
        for (std::size_t k = 0; k < extra_names.size(); ++k)
            cols[k].second.push_back(detail::parse_real(fields[first_feature + d + k], where, line));
        seq.frames.push_back(std::move(f));
    }
    if (seq.frames.empty()) data_error(where + ": no data rows");
    if (extra) *extra = std::move(cols);
    return seq;
}

// ---------------------------------------------------------------------------
// Dataset directories

inline std::string sequence_file_name(const std::string& id) { return id + ".csv"; }

inline ordered_json manifest_json(const SequenceDataset& ds) {
    ordered_json m;
    m["format"] = "ulda-dataset";
    m["version"] = 1;
    m["feature_dim"] = ds.feature_dim;
    m["label_min"] = ds.label_min;
    m["label_max"] = ds.label_max;
    m["has_utopia_label"] = ds.has_utopia_labels();
    m["sequences"] = ordered_json::array();
    for (const auto& s : ds.sequences)
        m["sequences"].push_back({{"id", s.id}, {"file", sequence_file_name(s.id)}, {"frames", s.size()}});
    return m;
}

/// Writes manifest.json and one CSV per sequence. `extra` is indexed like
/// ds.sequences (or empty).
inline void write_dataset(const SequenceDataset& ds, const fs::path& dir, const std::vector<ExtraColumns>& extra = {}) {
    if (!extra.empty() && extra.size() != ds.sequences.size()) usage_error("extra columns must cover every sequence");
    fs::create_directories(dir);
    const bool with_utopia = ds.has_utopia_labels();
    for (std::size_t s = 0; s < ds.sequences.size(); ++s) {
        const auto& seq = ds.sequences[s];
        write_file_atomic(dir / sequence_file_name(seq.id),
                          format_sequence_csv(seq, ds.feature_dim, with_utopia, extra.empty() ? ExtraColumns{} : extra[s]));
    }
    write_file_atomic(dir / kManifestName, manifest_json(ds).dump(2) + "\n");
}

inline SequenceDataset read_dataset(const fs::path& dir, std::vector<ExtraColumns>* extra = nullptr) {
    const fs::path manifest_path = dir / kManifestName;
    ordered_json m;
    try {
        m = ordered_json::parse(read_file(manifest_path));
    } catch (const nlohmann::json::parse_error& e) {
        data_error(manifest_path.string() + ": " + e.what());
    }
    SequenceDataset ds;
    try {
        ds.feature_dim = m.at("feature_dim").get<std::size_t>();
        ds.label_min = m.at("label_min").get<double>();
        ds.label_max = m.at("label_max").get<double>();
        if (!(ds.label_min < ds.label_max)) data_error(manifest_path.string() + ": label_min must be < label_max");
        for (const auto& entry : m.at("sequences")) {
            const auto id = entry.at("id").get<std::string>();
            const auto file = entry.at("file").get<std::string>();
            const fs::path path = dir / file;
            ExtraColumns cols;
            ds.sequences.push_back(parse_sequence_csv(read_file(path), ds.feature_dim, id, path.string(), &cols));
            if (entry.contains("frames") && entry["frames"].get<std::size_t>() != ds.sequences.back().size())
                data_error(path.string() + ": frame count differs from manifest");
            if (extra) extra->push_back(std::move(cols));
        }
    } catch (const nlohmann::json::exception& e) {
        data_error(manifest_path.string() + ": " + e.what());
    }
    if (ds.sequences.empty()) data_error(manifest_path.string() + ": no sequences");
    return ds;
}

// ---------------------------------------------------------------------------
// Histograms, plans, provenance

struct NamedHistogram {
    std::string sequence_id;
    LabelHistogram hist;
};

inline std::string format_histograms_csv(const std::vector<NamedHistogram>& hists) {
    std::string out = "sequence,bin,bin_lower,bin_upper,count\n";
    for (const auto& [id, h] : hists) {
        for (std::size_t i = 0; i < h.counts.size(); ++i) {
            out += id + "," + std::to_string(i) + "," + format_double(h.binning.bin_lower(i)) + "," +
                   format_double(h.binning.bin_lower(i + 1)) + "," + format_double(h.counts[i]) + "\n";
        }
    }
    return out;
}

/// Count vectors per sequence id, in file order.
inline std::vector<std::pair<std::string, std::vector<double>>> parse_histograms_csv(std::string_view text,
                                                                                       const std::string& where) {
    const auto rows = detail::lines(text);
    if (rows.empty() || rows.front().second != "sequence,bin,bin_lower,bin_upper,count")
        data_error(where + ": not a histogram file");
    std::vector<std::pair<std::string, std::vector<double>>> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto fields = detail::split_fields(rows[r].second);
        if (fields.size() != 5) detail::fail_at(where, rows[r].first, "expected 5 fields");
        const std::string id(fields[0]);
        if (out.empty() || out.back().first != id) out.emplace_back(id, std::vector<double>{});
        out.back().second.push_back(detail::parse_real(fields[4], where, rows[r].first));
    }
    return out;
}

inline std::string format_plan_csv(const std::vector<std::pair<std::string, AugmentationPlan>>& plans) {
    std::string out = "sequence,bin,n_before,n_after,delta,oversample,undersample\n";
    for (const auto& [id, plan] : plans)
        for (const auto& e : plan.entries)
            out += id + "," + std::to_string(e.bin) + "," + format_double(e.n_before) + "," + format_double(e.n_after) +
                   "," + format_double(e.delta) + "," + std::to_string(e.oversample_count()) + "," +
                   (e.undersample() ? "1" : "0") + "\n";
    return out;
}

inline ordered_json provenance_json(const ProvenanceRecord& r) {
    ordered_json j;
    j["sequence_id"] = r.sequence_id;
    j["bin"] = r.bin;
    j["slice_start"] = r.slice_start;
    j["slice_end"] = r.slice_end;
    j["matched_frame"] = r.matched_frame;
    j["insert_position"] = r.insert_position;
    j["output_index"] = r.output_index;
    j["seed"] = r.seed;
    return j;
}

inline std::string format_provenance_jsonl(const std::vector<ProvenanceRecord>& records) {
    std::string out;
    for (const auto& r : records) out += provenance_json(r).dump() + "\n";
    return out;
}

}  // namespace ulda::io
