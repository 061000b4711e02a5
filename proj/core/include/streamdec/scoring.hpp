#pragma once

#include "streamdec/attention.hpp"
#include "streamdec/features.hpp"
#include "streamdec/types.hpp"

#include <memory>
#include <span>
#include <vector>

namespace streamdec {

// Next-token distribution plus the attention the model spent on the frames.
struct StepScore {
    std::vector<double> log_probs;
    Attention attention;

    bool operator==(const StepScore &) const = default;
};

double logsumexp(std::span<const double> values);

// Stand-in for a sequence-to-sequence model. Implementations are immutable
// after construction and may be shared across concurrent sessions.
class Scorer {
public:
    virtual ~Scorer() = default;

    virtual std::size_t dim() const = 0;
    virtual std::size_t vocab_size() const = 0;
    virtual TokenId eos_id() const = 0;

    // Preconditions are checked by score_step(); implementations may assume
    // non-empty features of the right dimension and an eos-free prefix.
    virtual StepScore score(std::span<const FeatureFrame> features, std::span<const TokenId> prefix) const = 0;
};

// Validated entry point to Scorer::score.
StepScore score_step(const Scorer &scorer, std::span<const FeatureFrame> features,
                     std::span<const TokenId> prefix, std::size_t max_output_tokens);

// Log-linear interpolation of member distributions, renormalized; attention
// is the weighted mean of member attentions, renormalized to unit mass.
StepScore ensemble_combine(std::span<const StepScore> scores, std::span<const double> weights);

class EnsembleScorer final : public Scorer {
public:
    // attention_member < 0 selects the weighted mean of member attentions;
    // otherwise attention is taken from that member alone.
    EnsembleScorer(std::vector<std::shared_ptr<const Scorer>> members, std::vector<double> weights,
                   int attention_member = 0);

    std::size_t dim() const override { return members_.front()->dim(); }
    std::size_t vocab_size() const override { return members_.front()->vocab_size(); }
    TokenId eos_id() const override { return members_.front()->eos_id(); }
    StepScore score(std::span<const FeatureFrame> features, std::span<const TokenId> prefix) const override;

private:
    std::vector<std::shared_ptr<const Scorer>> members_;
    std::vector<double> weights_;
    int attention_member_;
};

} // namespace streamdec
