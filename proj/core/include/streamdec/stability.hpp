#pragma once

#include "streamdec/hypothesis.hpp"
#include "streamdec/session_config.hpp"
#include "streamdec/vocabulary.hpp"

#include <optional>
#include <span>

namespace streamdec {

struct EndpointEstimate {
    std::size_t prefix_len = 0;
    std::size_t t_c = 0;
    // audio_end_ms - (t_c + 1) * frame_period_ms
    double delta_ms = 0.0;
};

// Smallest frame index at which cumulative attention mass reaches
// `threshold`. Throws when the attention is not normalized (|mass - 1| > 1e-3).
std::size_t estimate_endpoint(const Attention &attention, double threshold);
std::size_t estimate_endpoint(std::span<const Attention> attention, std::size_t token_index, double threshold);

// Per-token endpoints of `hyp` from token `from` on.
std::vector<EndpointEstimate> endpoint_estimates(const Hypothesis &hyp, std::size_t from, double audio_end_ms,
                                                 double frame_period_ms, double threshold);

// Longest common prefix of all hypotheses beyond beam.committed_prefix,
// cut before any eos.
TokenSeq shared_prefix(const Beam &beam);

// Longest prefix of `best` beyond the first `committed_len` tokens whose last
// token ends at least delta_threshold_ms before audio_end_ms. With a
// vocabulary the result is cut back to the last complete word (the next token
// of `best` opens a word or is eos); without one it is token-granular.
TokenSeq reliable_prefix(const Hypothesis &best, std::size_t committed_len, double audio_end_ms,
                         double frame_period_ms, double delta_threshold_ms, double threshold,
                         const Vocabulary *vocab = nullptr);

struct DetectionContext {
    const Vocabulary *vocab = nullptr;
    double audio_end_ms = 0.0;
    double frame_period_ms = 0.0;
    double delta_threshold_ms = 0.0;
    double attention_mass_threshold = 0.95;
};

struct Detection {
    TokenSeq tokens;
    // Empty when nothing became stable.
    std::optional<Detector> detector;
};

// SharedOnly and EndpointOnly apply one condition; Combined is their logical
// OR and keeps the longer extension (ties reported as SharedPrefix).
Detection detect(const Beam &beam, DetectorMode mode, const DetectionContext &ctx);

} // namespace streamdec
