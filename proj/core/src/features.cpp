#include "streamdec/features.hpp"

#include "streamdec/error.hpp"
#include "streamdec/text_format.hpp"

#include <cmath>

namespace streamdec {

FeatureStream::FeatureStream(std::vector<FeatureFrame> frames, double frame_period_ms, std::size_t dim)
    : frames_(std::move(frames)), frame_period_ms_(frame_period_ms), dim_(dim) {
    if (!(frame_period_ms_ > 0.0) || !std::isfinite(frame_period_ms_))
        throw Error("frame period must be positive");
    if (dim_ == 0) throw Error("feature dimension must be positive");
    for (std::size_t i = 0; i < frames_.size(); ++i) {
        const auto &f = frames_[i];
        if (f.index != i) throw Error("frame " + std::to_string(i) + " has index " + std::to_string(f.index));
        if (f.values.size() != dim_)
            throw Error("frame " + std::to_string(i) + " has " + std::to_string(f.values.size()) +
                        " values, expected " + std::to_string(dim_));
        for (double v : f.values)
            if (!std::isfinite(v)) throw Error("frame " + std::to_string(i) + " has a non-finite value");
    }
}

FeatureStream FeatureStream::from_rows(std::vector<std::vector<double>> rows, double frame_period_ms,
                                       std::size_t dim) {
    std::vector<FeatureFrame> frames;
    frames.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) frames.push_back({std::move(rows[i]), i});
    return FeatureStream(std::move(frames), frame_period_ms, dim);
}

FeatureStream FeatureStream::load(const std::filesystem::path &path) {
    try {
        return parse(read_file(path));
    } catch (const ParseError &e) {
        throw ParseError(path.string() + ": " + e.message(), e.line());
    }
}

FeatureStream FeatureStream::parse(std::string_view text) {
    auto lines = split(text, '\n');
    std::size_t line_no = 0;
    std::size_t dim = 0;
    double period = 0.0;
    bool have_header = false;
    std::vector<std::vector<double>> rows;
    for (auto line : lines) {
        ++line_no;
        auto fields = split_whitespace(line);
        if (fields.empty()) continue;
        if (!have_header) {
            bool got_dim = false, got_period = false;
            for (auto f : fields) {
                auto eq = f.find('=');
                if (eq == std::string_view::npos) throw ParseError("bad header field '" + std::string(f) + "'", line_no);
                auto key = f.substr(0, eq);
                auto val = f.substr(eq + 1);
                try {
                    if (key == "dim") {
                        auto d = parse_int(val);
                        if (d <= 0) throw ParseError("dim must be positive", line_no);
                        dim = static_cast<std::size_t>(d);
                        got_dim = true;
                    } else if (key == "frame_period_ms") {
                        period = parse_double(val);
                        got_period = true;
                    } else {
                        throw ParseError("unknown header key '" + std::string(key) + "'", line_no);
                    }
                } catch (const ParseError &e) {
                    if (e.line()) throw;
                    throw ParseError(e.message(), line_no);
                }
            }
            if (!got_dim || !got_period) throw ParseError("header needs dim and frame_period_ms", line_no);
            have_header = true;
            continue;
        }
        if (fields.size() != dim)
            throw ParseError("expected " + std::to_string(dim) + " values, got " + std::to_string(fields.size()),
                             line_no);
        std::vector<double> row;
        row.reserve(dim);
        for (auto f : fields) {
            try {
                row.push_back(parse_double(f));
            } catch (const ParseError &e) {
                throw ParseError(e.message(), line_no);
            }
        }
        rows.push_back(std::move(row));
    }
    if (!have_header) throw ParseError("missing header", 0);
    return from_rows(std::move(rows), period, dim);
}

std::string FeatureStream::serialize() const {
    std::string out = "dim=" + std::to_string(dim_) + " frame_period_ms=" + format_double(frame_period_ms_) + "\n";
    for (const auto &f : frames_) {
        for (std::size_t i = 0; i < f.values.size(); ++i) {
            if (i) out += ' ';
            out += format_double(f.values[i], 1);
        }
        out += '\n';
    }
    return out;
}

std::size_t frames_per_chunk(double chunk_ms, double frame_period_ms) {
    if (!(chunk_ms > 0.0)) throw Error("chunk_ms must be positive");
    double ratio = chunk_ms / frame_period_ms;
    auto n = static_cast<std::size_t>(std::floor(ratio + 1e-9));
    if (n == 0) throw Error("chunk_ms is shorter than one frame period");
    return n;
}

std::vector<Chunk> chunk_stream(const FeatureStream &stream, double chunk_ms) {
    std::vector<Chunk> chunks;
    if (!(chunk_ms > 0.0)) throw Error("chunk_ms must be positive");
    if (stream.empty()) {
        chunks.push_back({{}, 0.0, 0.0, true});
        return chunks;
    }
    const std::size_t per = frames_per_chunk(chunk_ms, stream.frame_period_ms());
    auto frames = stream.frames();
    for (std::size_t start = 0; start < frames.size(); start += per) {
        std::size_t end = std::min(frames.size(), start + per);
        Chunk c;
        c.frames.assign(frames.begin() + static_cast<std::ptrdiff_t>(start),
                        frames.begin() + static_cast<std::ptrdiff_t>(end));
        c.audio_end_ms = static_cast<double>(end) * stream.frame_period_ms();
        c.arrival_wall_ms = c.audio_end_ms;
        chunks.push_back(std::move(c));
    }
    chunks.push_back({{}, stream.duration_ms(), stream.duration_ms(), true});
    return chunks;
}

} // namespace streamdec
