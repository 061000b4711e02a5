#include "streamdec/stability.hpp"

#include "streamdec/error.hpp"

#include <algorithm>
#include <cmath>

namespace streamdec {

std::size_t estimate_endpoint(const Attention &attention, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw Error("attention mass threshold must be in (0, 1]");
    double mass = attention.mass();
    if (std::abs(mass - 1.0) > 1e-3) throw Error("attention is not normalized (mass " + std::to_string(mass) + ")");
    auto w = attention.weights();
    double cumulative = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        cumulative += w[i];
        if (cumulative >= threshold) return attention.first_frame() + i;
    }
    // threshold within rounding of the total mass
    return attention.end_frame() - 1;
}

std::size_t estimate_endpoint(std::span<const Attention> attention, std::size_t token_index, double threshold) {
    if (token_index >= attention.size()) throw Error("token index outside attention list");
    return estimate_endpoint(attention[token_index], threshold);
}

std::vector<EndpointEstimate> endpoint_estimates(const Hypothesis &hyp, std::size_t from, double audio_end_ms,
                                                 double frame_period_ms, double threshold) {
    std::vector<EndpointEstimate> out;
    for (std::size_t i = from; i < hyp.tokens.size(); ++i) {
        std::size_t t_c = estimate_endpoint(hyp.attention, i, threshold);
        out.push_back({i + 1, t_c, audio_end_ms - static_cast<double>(t_c + 1) * frame_period_ms});
    }
    return out;
}

TokenSeq shared_prefix(const Beam &beam) {
    if (beam.hypotheses.empty()) return {};
    const std::size_t from = beam.committed_prefix.size();
    std::size_t common = beam.hypotheses.front().tokens.size();
    const auto &first = beam.hypotheses.front().tokens;
    for (const auto &h : beam.hypotheses) {
        std::size_t n = std::min(common, h.tokens.size());
        std::size_t i = 0;
        while (i < n && h.tokens[i] == first[i]) ++i;
        common = i;
    }
    if (common <= from) return {};
    TokenSeq out(first.begin() + static_cast<std::ptrdiff_t>(from), first.begin() + static_cast<std::ptrdiff_t>(common));
    // eos is never committed; the flush step ends the transcript.
    const auto &probe = beam.hypotheses.front();
    if (probe.finished && common == probe.tokens.size()) out.pop_back();
    return out;
}

TokenSeq reliable_prefix(const Hypothesis &best, std::size_t committed_len, double audio_end_ms,
                         double frame_period_ms, double delta_threshold_ms, double threshold,
                         const Vocabulary *vocab) {
    std::size_t limit = best.tokens.size();
    if (best.finished && limit > 0) --limit; // eos
    auto at_boundary = [&](std::size_t len) {
        if (!vocab) return true;
        if (len >= best.tokens.size()) return false;
        TokenId next = best.tokens[len];
        return next == vocab->eos_id() || vocab->is_word_start(next);
    };
    // Both conditions must hold at the cut: the last token is old enough and a word ends there.
    std::size_t length = committed_len;
    for (std::size_t i = committed_len; i < limit; ++i) {
        std::size_t t_c = estimate_endpoint(best.attention, i, threshold);
        double delta = audio_end_ms - static_cast<double>(t_c + 1) * frame_period_ms;
        if (delta >= delta_threshold_ms && at_boundary(i + 1)) length = i + 1;
    }
    if (length <= committed_len) return {};
    return TokenSeq(best.tokens.begin() + static_cast<std::ptrdiff_t>(committed_len),
                    best.tokens.begin() + static_cast<std::ptrdiff_t>(length));
}

Detection detect(const Beam &beam, DetectorMode mode, const DetectionContext &ctx) {
    if (beam.hypotheses.empty()) throw Error("detect: empty beam");
    Detection out;
    TokenSeq shared, reliable;
    if (mode != DetectorMode::EndpointOnly) shared = shared_prefix(beam);
    if (mode != DetectorMode::SharedOnly && std::isfinite(ctx.delta_threshold_ms))
        reliable = reliable_prefix(beam.hypotheses.front(), beam.committed_prefix.size(), ctx.audio_end_ms,
                                   ctx.frame_period_ms, ctx.delta_threshold_ms, ctx.attention_mass_threshold,
                                   ctx.vocab);
    if (shared.empty() && reliable.empty()) return out;
    if (reliable.size() > shared.size()) {
        out.tokens = std::move(reliable);
        out.detector = Detector::ReliableEndpoint;
    } else {
        out.tokens = std::move(shared);
        out.detector = Detector::SharedPrefix;
    }
    return out;
}

} // namespace streamdec
