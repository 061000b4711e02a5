#pragma once

#include "streamdec/types.hpp"

#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace streamdec {

enum class DetectorMode { SharedOnly, EndpointOnly, Combined };
enum class Detector { SharedPrefix, ReliableEndpoint, Flush };

std::string_view to_string(DetectorMode mode);
std::string_view to_string(Detector detector);
DetectorMode parse_detector_mode(std::string_view text);
Detector parse_detector(std::string_view text);

struct CommitRecord {
    TokenSeq tokens;
    // Words whose final token is part of this commit.
    std::vector<std::string> words;
    double commit_wall_ms = 0.0;
    double audio_consumed_ms = 0.0;
    Detector detector = Detector::Flush;

    bool operator==(const CommitRecord &) const = default;
};

struct SessionConfig {
    double chunk_ms = 300.0;
    std::size_t beam_size = 8;
    DetectorMode detector_mode = DetectorMode::SharedOnly;
    double delta_threshold_ms = std::numeric_limits<double>::infinity();
    double attention_mass_threshold = 0.95;
    std::size_t max_output_tokens = 256;
    // Rank by log_score / length instead of the raw sum.
    bool length_normalized = false;

    // Throws Error on an invalid combination.
    void validate() const;
};

} // namespace streamdec
