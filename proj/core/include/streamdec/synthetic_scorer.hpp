#pragma once

#include "streamdec/scoring.hpp"
#include "streamdec/vocabulary.hpp"

#include <cstdint>
#include <memory>

namespace streamdec {

struct SyntheticParams {
    std::uint64_t seed = 0;
    // Frames consumed per output token; the endpoint of a prefix of length k
    // is frame (k + 1) * frames_per_token - 1.
    std::size_t frames_per_token = 8;
    double sharpness = 10.0;
    double prior_scale = 0.5;
    // Acoustic confidence decays with how far the prefix strays from the
    // features: sharpness is scaled by exp(-derail * sum of per-token gaps
    // between the best and the chosen token's block score).
    double derail = 4.0;
    // eos needs stronger evidence than other tokens: its block score d
    // becomes (1 + eos_margin) * d - eos_margin.
    double eos_margin = 2.0;
    // Prefix-keyed logit perturbation, scaled by noise_level in [0, 1].
    double noise_level = 0.0;
    std::uint64_t noise_seed = 0;
    double noise_amplitude = 4.0;

    bool operator==(const SyntheticParams &) const = default;
};

// Deterministic, prefix-consistent test scorer. Token k of a hypothesis is
// read off feature block k (frames [k*F, (k+1)*F)): each token owns a unit
// embedding, and the logit of v is sharpness * <mean block frame, e_v> plus a
// small bigram prior. A prefix that disagrees with earlier blocks flattens
// the distribution, so wrong branches fall behind as decoding goes on. Output for a prefix depends only on the prefix and on
// frames up to its endpoint. Attention covers the block with half its mass on
// the last frame, so the 0.95-mass endpoint is exactly the block end. When the
// block is not fully available, all attention sits on the last available frame.
class SyntheticScorer final : public Scorer {
public:
    SyntheticScorer(SyntheticParams params, std::size_t vocab_size, TokenId eos_id, std::size_t dim);

    std::size_t dim() const override { return dim_; }
    std::size_t vocab_size() const override { return vocab_size_; }
    TokenId eos_id() const override { return eos_; }
    StepScore score(std::span<const FeatureFrame> features, std::span<const TokenId> prefix) const override;

    const SyntheticParams &params() const noexcept { return params_; }
    // Last frame the scorer reads for a prefix of this length.
    std::size_t endpoint_frame(std::size_t prefix_len) const noexcept {
        return (prefix_len + 1) * params_.frames_per_token - 1;
    }
    std::span<const double> embedding(TokenId id) const;

private:
    // Mean of frames [begin, last] dotted with every embedding.
    std::vector<double> block_scores(std::span<const FeatureFrame> features, std::size_t begin,
                                     std::size_t last) const;

    SyntheticParams params_;
    std::size_t vocab_size_;
    TokenId eos_;
    std::size_t dim_;
    std::vector<double> embeddings_; // vocab_size x dim, unit rows
    std::vector<double> prior_;      // (vocab_size + 1) x vocab_size; last row is sentence start
};

// Unit-norm token embeddings shared by the scorer and the corpus generator.
std::vector<double> synthetic_embeddings(std::uint64_t seed, std::size_t vocab_size, std::size_t dim);

std::shared_ptr<const SyntheticScorer> build_synthetic_scorer(std::uint64_t seed, const Vocabulary &vocab,
                                                              std::size_t dim);

// 64-bit finalizer used for keyed pseudo-random values.
std::uint64_t mix64(std::uint64_t x) noexcept;
// Uniform double in [0, 1) from the top 53 bits.
double unit_interval(std::uint64_t bits) noexcept;

} // namespace streamdec
