#include "streamdec/synthetic_scorer.hpp"

#include "streamdec/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace streamdec {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double unit_interval(std::uint64_t bits) noexcept { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

std::vector<double> synthetic_embeddings(std::uint64_t seed, std::size_t vocab_size, std::size_t dim) {
    std::mt19937_64 rng(mix64(seed));
    std::vector<double> out(vocab_size * dim);
    for (std::size_t v = 0; v < vocab_size; ++v) {
        double norm = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            double x = 2.0 * unit_interval(rng()) - 1.0;
            out[v * dim + d] = x;
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) norm = 1.0;
        for (std::size_t d = 0; d < dim; ++d) out[v * dim + d] /= norm;
    }
    return out;
}

SyntheticScorer::SyntheticScorer(SyntheticParams params, std::size_t vocab_size, TokenId eos_id, std::size_t dim)
    : params_(params), vocab_size_(vocab_size), eos_(eos_id), dim_(dim) {
    if (dim_ == 0) throw Error("synthetic scorer: dim must be positive");
    if (vocab_size_ < 2) throw Error("synthetic scorer: vocabulary needs at least 2 tokens");
    if (eos_ < 0 || static_cast<std::size_t>(eos_) >= vocab_size_) throw Error("synthetic scorer: bad eos id");
    if (params_.frames_per_token == 0) throw Error("synthetic scorer: frames_per_token must be positive");
    if (!(params_.noise_level >= 0.0 && params_.noise_level <= 1.0))
        throw Error("synthetic scorer: noise_level must be in [0, 1]");
    embeddings_ = synthetic_embeddings(params_.seed, vocab_size_, dim_);
    std::mt19937_64 rng(mix64(params_.seed ^ 0x5851F42D4C957F2DULL));
    prior_.resize((vocab_size_ + 1) * vocab_size_);
    for (double &p : prior_) p = params_.prior_scale * (2.0 * unit_interval(rng()) - 1.0);
}

std::span<const double> SyntheticScorer::embedding(TokenId id) const {
    return std::span<const double>(embeddings_).subspan(static_cast<std::size_t>(id) * dim_, dim_);
}

std::vector<double> SyntheticScorer::block_scores(std::span<const FeatureFrame> features, std::size_t begin,
                                                  std::size_t last) const {
    std::vector<double> mean(dim_, 0.0);
    for (std::size_t f = begin; f <= last; ++f)
        for (std::size_t d = 0; d < dim_; ++d) mean[d] += features[f].values[d];
    const double count = static_cast<double>(last - begin + 1);
    for (double &m : mean) m /= count;
    std::vector<double> out(vocab_size_, 0.0);
    for (std::size_t v = 0; v < vocab_size_; ++v) {
        double dot = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) dot += mean[d] * embeddings_[v * dim_ + d];
        out[v] = dot;
    }
    const auto e = static_cast<std::size_t>(eos_);
    out[e] = (1.0 + params_.eos_margin) * out[e] - params_.eos_margin;
    return out;
}

StepScore SyntheticScorer::score(std::span<const FeatureFrame> features, std::span<const TokenId> prefix) const {
    const std::size_t per = params_.frames_per_token;
    const std::size_t begin = prefix.size() * per;
    const std::size_t endpoint = endpoint_frame(prefix.size());
    const std::size_t available = features.size();

    std::vector<double> logits(vocab_size_, 0.0);
    if (begin < available) {
        double gap = 0.0;
        if (params_.derail > 0.0) {
            for (std::size_t j = 0; j < prefix.size(); ++j) {
                auto s = block_scores(features, j * per, (j + 1) * per - 1);
                gap += *std::max_element(s.begin(), s.end()) - s[static_cast<std::size_t>(prefix[j])];
            }
        }
        const double sharp = params_.sharpness * std::exp(-params_.derail * gap);
        auto s = block_scores(features, begin, std::min(endpoint, available - 1));
        for (std::size_t v = 0; v < vocab_size_; ++v) logits[v] = sharp * s[v];
    }
    const std::size_t context = prefix.empty() ? vocab_size_ : static_cast<std::size_t>(prefix.back());
    for (std::size_t v = 0; v < vocab_size_; ++v) logits[v] += prior_[context * vocab_size_ + v];

    if (params_.noise_level > 0.0) {
        std::uint64_t h = mix64(params_.noise_seed);
        for (TokenId t : prefix) h = mix64(h ^ static_cast<std::uint64_t>(t));
        const double scale = params_.noise_level * params_.noise_amplitude;
        for (std::size_t v = 0; v < vocab_size_; ++v) {
            double u = unit_interval(mix64(h + 0x632BE59BD9B4E019ULL * (v + 1)));
            logits[v] += scale * (2.0 * u - 1.0);
        }
    }

    StepScore out;
    const double norm = logsumexp(logits);
    out.log_probs.resize(vocab_size_);
    for (std::size_t v = 0; v < vocab_size_; ++v) out.log_probs[v] = logits[v] - norm;

    if (endpoint < available) {
        if (per == 1) {
            out.attention = Attention::point(endpoint);
        } else {
            std::vector<double> w(per, 0.5 / static_cast<double>(per - 1));
            w.back() = 0.5;
            out.attention = Attention(begin, std::move(w));
        }
    } else {
        out.attention = Attention::point(available - 1);
    }
    return out;
}

std::shared_ptr<const SyntheticScorer> build_synthetic_scorer(std::uint64_t seed, const Vocabulary &vocab,
                                                              std::size_t dim) {
    SyntheticParams params;
    params.seed = seed;
    return std::make_shared<SyntheticScorer>(params, vocab.size(), vocab.eos_id(), dim);
}

} // namespace streamdec
