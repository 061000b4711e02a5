#pragma once

#include "streamdec/attention.hpp"
#include "streamdec/types.hpp"

#include <span>
#include <vector>

namespace streamdec {

struct Hypothesis {
    TokenSeq tokens;
    // Per-token log probabilities; log_score is their left-to-right sum.
    std::vector<double> token_log_probs;
    double log_score = 0.0;
    std::vector<Attention> attention;
    bool finished = false;

    bool operator==(const Hypothesis &) const = default;
};

// Descending score; equal scores fall back to lexicographic token order.
bool ranks_before(const Hypothesis &a, const Hypothesis &b);

struct Beam {
    std::vector<Hypothesis> hypotheses;
    TokenSeq committed_prefix;

    bool operator==(const Beam &) const = default;
};

bool starts_with(std::span<const TokenId> seq, std::span<const TokenId> prefix);

} // namespace streamdec
