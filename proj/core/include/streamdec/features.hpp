#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace streamdec {

struct FeatureFrame {
    std::vector<double> values;
    std::size_t index = 0;

    bool operator==(const FeatureFrame &) const = default;
};

// Immutable sequence of equally spaced frames, indexed consecutively from 0.
class FeatureStream {
public:
    FeatureStream(std::vector<FeatureFrame> frames, double frame_period_ms, std::size_t dim);
    // Reindexes rows 0..n-1.
    static FeatureStream from_rows(std::vector<std::vector<double>> rows, double frame_period_ms,
                                   std::size_t dim);

    std::span<const FeatureFrame> frames() const noexcept { return frames_; }
    std::size_t size() const noexcept { return frames_.size(); }
    bool empty() const noexcept { return frames_.empty(); }
    double frame_period_ms() const noexcept { return frame_period_ms_; }
    std::size_t dim() const noexcept { return dim_; }
    double duration_ms() const noexcept { return static_cast<double>(frames_.size()) * frame_period_ms_; }

    // Text form: header `dim=<d> frame_period_ms=<p>`, then one frame per line.
    static FeatureStream load(const std::filesystem::path &path);
    static FeatureStream parse(std::string_view text);
    std::string serialize() const;

    bool operator==(const FeatureStream &) const = default;

private:
    std::vector<FeatureFrame> frames_;
    double frame_period_ms_;
    std::size_t dim_;
};

struct Chunk {
    std::vector<FeatureFrame> frames;
    double arrival_wall_ms = 0.0;
    double audio_end_ms = 0.0;
    bool flush = false;
};

// Partitions the stream into chunks of floor(chunk_ms / frame_period_ms)
// frames, followed by an empty flush chunk. A chunk becomes available once
// its last frame has been captured, so arrival_wall_ms == audio_end_ms.
std::vector<Chunk> chunk_stream(const FeatureStream &stream, double chunk_ms);

// Whole frames per chunk. Tolerates round-off in chunk_ms / frame_period_ms.
std::size_t frames_per_chunk(double chunk_ms, double frame_period_ms);

} // namespace streamdec
