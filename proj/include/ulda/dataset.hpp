#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ulda {

using Feature = std::vector<double>;

struct Frame {
    std::int64_t t = 0;
    double label = 0.0;
    std::optional<double> utopia_label;
    Feature features;

    bool operator==(const Frame&) const = default;
};

/// One time series: an ordered list of frames sharing an id.
struct Sequence {
    std::string id;
    std::vector<Frame> frames;

    std::size_t size() const { return frames.size(); }
    bool empty() const { return frames.empty(); }

    std::vector<double> labels() const {
        std::vector<double> out;
        out.reserve(frames.size());
        for (const auto& f : frames) out.push_back(f.label);
        return out;
    }

    bool operator==(const Sequence&) const = default;
};

struct SequenceDataset {
    std::size_t feature_dim = 0;
    double label_min = -1.0;
    double label_max = 1.0;
    std::vector<Sequence> sequences;

    std::size_t frame_count() const {
        std::size_t n = 0;
        for (const auto& s : sequences) n += s.size();
        return n;
    }

    bool has_utopia_labels() const {
        for (const auto& s : sequences)
            for (const auto& f : s.frames)
                if (!f.utopia_label) return false;
        return !sequences.empty();
    }

    bool operator==(const SequenceDataset&) const = default;
};

}  // namespace ulda
