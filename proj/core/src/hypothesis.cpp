#include "streamdec/hypothesis.hpp"

#include <algorithm>

namespace streamdec {

bool ranks_before(const Hypothesis &a, const Hypothesis &b) {
    if (a.log_score != b.log_score) return a.log_score > b.log_score;
    return std::lexicographical_compare(a.tokens.begin(), a.tokens.end(), b.tokens.begin(), b.tokens.end());
}

bool starts_with(std::span<const TokenId> seq, std::span<const TokenId> prefix) {
    return seq.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), seq.begin());
}

} // namespace streamdec
