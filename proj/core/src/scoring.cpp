#include "streamdec/scoring.hpp"

#include "streamdec/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace streamdec {

double logsumexp(std::span<const double> values) {
    if (values.empty()) return -std::numeric_limits<double>::infinity();
    double hi = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(hi)) return hi;
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - hi);
    return hi + std::log(sum);
}

StepScore score_step(const Scorer &scorer, std::span<const FeatureFrame> features,
                     std::span<const TokenId> prefix, std::size_t max_output_tokens) {
    if (features.empty()) throw Error("score_step: no features");
    if (features.front().values.size() != scorer.dim())
        throw Error("score_step: feature dimension " + std::to_string(features.front().values.size()) +
                    " does not match scorer dimension " + std::to_string(scorer.dim()));
    if (prefix.size() >= max_output_tokens)
        throw Error("score_step: prefix length " + std::to_string(prefix.size()) + " reaches max_output_tokens");
    for (TokenId t : prefix) {
        if (t == scorer.eos_id()) throw Error("score_step: prefix contains eos");
        if (t < 0 || static_cast<std::size_t>(t) >= scorer.vocab_size())
            throw Error("score_step: unknown token id " + std::to_string(t));
    }
    return scorer.score(features, prefix);
}

StepScore ensemble_combine(std::span<const StepScore> scores, std::span<const double> weights) {
    if (scores.empty()) throw Error("ensemble_combine: no members");
    if (scores.size() != weights.size()) throw Error("ensemble_combine: weight count mismatch");
    const std::size_t vocab = scores.front().log_probs.size();
    std::size_t first = std::numeric_limits<std::size_t>::max(), end = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].log_probs.size() != vocab) throw Error("ensemble_combine: log_probs length mismatch");
        if (!(weights[i] >= 0.0)) throw Error("ensemble_combine: negative weight");
        if (!scores[i].attention.empty()) {
            first = std::min(first, scores[i].attention.first_frame());
            end = std::max(end, scores[i].attention.end_frame());
        }
    }

    StepScore out;
    out.log_probs.assign(vocab, 0.0);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (weights[i] == 0.0) continue;
        for (std::size_t v = 0; v < vocab; ++v) out.log_probs[v] += weights[i] * scores[i].log_probs[v];
    }
    double norm = logsumexp(out.log_probs);
    for (double &lp : out.log_probs) lp -= norm;

    if (end > first) {
        std::vector<double> mixed(end - first, 0.0);
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const auto &att = scores[i].attention;
            for (std::size_t f = att.first_frame(); f < att.end_frame(); ++f)
                mixed[f - first] += weights[i] * att.at(f);
        }
        double mass = 0.0;
        for (double w : mixed) mass += w;
        if (mass > 0.0)
            for (double &w : mixed) w /= mass;
        out.attention = Attention(first, std::move(mixed));
    }
    return out;
}

EnsembleScorer::EnsembleScorer(std::vector<std::shared_ptr<const Scorer>> members, std::vector<double> weights,
                               int attention_member)
    : members_(std::move(members)), weights_(std::move(weights)), attention_member_(attention_member) {
    if (members_.empty()) throw Error("ensemble needs at least one member");
    if (members_.size() != weights_.size()) throw Error("ensemble weight count mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (!members_[i]) throw Error("ensemble member is null");
        if (!(weights_[i] >= 0.0)) throw Error("ensemble weights must be non-negative");
        total += weights_[i];
        if (members_[i]->dim() != members_.front()->dim() ||
            members_[i]->vocab_size() != members_.front()->vocab_size() ||
            members_[i]->eos_id() != members_.front()->eos_id())
            throw Error("ensemble members disagree on dimension or vocabulary");
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error("ensemble weights must sum to 1");
    if (attention_member_ >= static_cast<int>(members_.size()))
        throw Error("attention member index out of range");
}

StepScore EnsembleScorer::score(std::span<const FeatureFrame> features, std::span<const TokenId> prefix) const {
    std::vector<StepScore> parts;
    parts.reserve(members_.size());
    for (const auto &m : members_) parts.push_back(m->score(features, prefix));
    StepScore out = ensemble_combine(parts, weights_);
    if (attention_member_ >= 0) out.attention = parts[static_cast<std::size_t>(attention_member_)].attention;
    return out;
}

} // namespace streamdec
