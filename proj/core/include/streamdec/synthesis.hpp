#pragma once

#include "streamdec/corpus.hpp"

#include <cstdint>

namespace streamdec {

struct CorpusOptions {
    std::uint64_t seed = 1;
    std::size_t n_utterances = 10;
    std::size_t vocab_size = 32;
    std::size_t dim = 16;
    std::size_t min_words = 3;
    std::size_t max_words = 12;
    std::size_t max_tokens_per_word = 3;
    std::size_t frames_per_token = 8;
    double frame_period_ms = 10.0;
    // Half-width of the uniform noise added to every feature value.
    double feature_noise = 0.3;
    // Members of the matched scorer; more than one yields a uniform ensemble
    // whose members differ only in their noise seed.
    std::size_t ensemble_size = 1;
    double scorer_noise = 0.0;
};

// Plants a random word sequence per utterance, writes feature block k as the
// embedding of token k (plus noise), appends an eos block and a tail of
// trailing frames, and emits word alignments from the block layout. The
// returned scorer config reads these features. Same options, same corpus.
Corpus generate_corpus(const CorpusOptions &options);
Corpus generate_corpus(std::uint64_t seed, std::size_t n_utterances, const Vocabulary &vocab,
                       std::size_t min_words, std::size_t max_words, std::size_t dim);

// Deterministic log-prob perturbation of every synthetic member; noise 0
// leaves the scorer spec unchanged. Ensemble members get distinct derived seeds.
ScorerSpec corrupt_scorer(const ScorerSpec &spec, double noise_level, std::uint64_t seed);

} // namespace streamdec
