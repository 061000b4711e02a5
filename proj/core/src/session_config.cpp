#include "streamdec/session_config.hpp"

#include "streamdec/error.hpp"

#include <cmath>

namespace streamdec {

std::string_view to_string(DetectorMode mode) {
    switch (mode) {
    case DetectorMode::SharedOnly: return "shared";
    case DetectorMode::EndpointOnly: return "endpoint";
    case DetectorMode::Combined: return "combined";
    }
    return "?";
}

std::string_view to_string(Detector detector) {
    switch (detector) {
    case Detector::SharedPrefix: return "shared";
    case Detector::ReliableEndpoint: return "endpoint";
    case Detector::Flush: return "flush";
    }
    return "?";
}

DetectorMode parse_detector_mode(std::string_view text) {
    if (text == "shared") return DetectorMode::SharedOnly;
    if (text == "endpoint") return DetectorMode::EndpointOnly;
    if (text == "combined") return DetectorMode::Combined;
    throw Error("unknown detector mode '" + std::string(text) + "'");
}

Detector parse_detector(std::string_view text) {
    if (text == "shared") return Detector::SharedPrefix;
    if (text == "endpoint") return Detector::ReliableEndpoint;
    if (text == "flush") return Detector::Flush;
    throw Error("unknown detector '" + std::string(text) + "'");
}

void SessionConfig::validate() const {
    if (!(chunk_ms > 0.0) || !std::isfinite(chunk_ms)) throw Error("chunk_ms must be positive");
    if (beam_size == 0) throw Error("beam_size must be positive");
    if (!(delta_threshold_ms >= 0.0)) throw Error("delta_threshold_ms must be non-negative");
    if (!(attention_mass_threshold > 0.0 && attention_mass_threshold <= 1.0))
        throw Error("attention_mass_threshold must be in (0, 1]");
    if (max_output_tokens == 0) throw Error("max_output_tokens must be positive");
}

} // namespace streamdec
