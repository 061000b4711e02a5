#include "streamdec/synthesis.hpp"

#include "streamdec/error.hpp"
#include "streamdec/synthetic_scorer.hpp"

#include <cstdio>
#include <random>

namespace streamdec {

namespace {

std::size_t pick(std::mt19937_64 &rng, std::size_t lo, std::size_t hi) {
    // Inclusive range; bias from the modulo is irrelevant here.
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

std::string utterance_id(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "utt%05zu", index);
    return buf;
}

} // namespace

Corpus generate_corpus(const CorpusOptions &o) {
    if (o.n_utterances == 0) throw Error("corpus: need at least one utterance");
    if (o.min_words == 0 || o.min_words > o.max_words) throw Error("corpus: invalid words-per-utterance range");
    if (o.dim == 0) throw Error("corpus: dim must be positive");
    if (o.frames_per_token == 0) throw Error("corpus: frames_per_token must be positive");
    if (o.max_tokens_per_word == 0) throw Error("corpus: max_tokens_per_word must be positive");
    if (o.ensemble_size == 0) throw Error("corpus: ensemble_size must be positive");

    auto vocab = make_synthetic_vocabulary(o.vocab_size);
    std::vector<TokenId> starts, conts;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        auto id = static_cast<TokenId>(i);
        if (id == vocab.eos_id()) continue;
        (vocab.is_word_start(id) ? starts : conts).push_back(id);
    }
    if (starts.size() < 2) throw Error("corpus: vocabulary too small for the requested words");
    const std::size_t max_extra = conts.empty() ? 0 : o.max_tokens_per_word - 1;

    const auto embeddings = synthetic_embeddings(o.seed, vocab.size(), o.dim);
    const std::size_t per = o.frames_per_token;
    const double block_s = static_cast<double>(per) * o.frame_period_ms / 1000.0;

    Corpus corpus{vocab, {}, {}};
    for (std::size_t u = 0; u < o.n_utterances; ++u) {
        std::mt19937_64 rng(mix64(o.seed * 0x100000001B3ULL + u));
        Utterance utt{utterance_id(u), FeatureStream({}, o.frame_period_ms, o.dim), {}, {}, {}};

        const std::size_t n_words = pick(rng, o.min_words, o.max_words);
        for (std::size_t w = 0; w < n_words; ++w) {
            const std::size_t first = utt.planted.size();
            utt.planted.push_back(starts[pick(rng, 0, starts.size() - 1)]);
            const std::size_t extra = max_extra ? pick(rng, 0, max_extra) : 0;
            for (std::size_t k = 0; k < extra; ++k) utt.planted.push_back(conts[pick(rng, 0, conts.size() - 1)]);
            const std::size_t last = utt.planted.size() - 1;
            utt.alignment.push_back({utt.id, "", static_cast<double>(first) * block_s,
                                     static_cast<double>(last + 1) * block_s});
        }
        utt.reference = tokens_to_words(vocab, utt.planted);
        for (std::size_t w = 0; w < n_words; ++w) utt.alignment[w].word = utt.reference[w];

        // planted tokens, the eos block, then a tail of one to three blocks
        TokenSeq layout = utt.planted;
        layout.push_back(vocab.eos_id());
        const std::size_t tail = pick(rng, per, 3 * per - 1);
        std::vector<std::vector<double>> rows;
        rows.reserve(layout.size() * per + tail);
        auto emit = [&](TokenId token) {
            std::vector<double> row(o.dim);
            for (std::size_t d = 0; d < o.dim; ++d) {
                double noise = o.feature_noise * (2.0 * unit_interval(rng()) - 1.0);
                row[d] = embeddings[static_cast<std::size_t>(token) * o.dim + d] + noise;
            }
            rows.push_back(std::move(row));
        };
        for (TokenId t : layout)
            for (std::size_t f = 0; f < per; ++f) emit(t);
        for (std::size_t f = 0; f < tail; ++f) emit(vocab.eos_id());
        utt.stream = FeatureStream::from_rows(std::move(rows), o.frame_period_ms, o.dim);
        corpus.utterances.push_back(std::move(utt));
    }

    ScorerSpec member;
    member.synthetic.seed = o.seed;
    member.synthetic.frames_per_token = per;
    ScorerSpec spec = member;
    if (o.ensemble_size > 1) spec = uniform_ensemble(std::vector<ScorerSpec>(o.ensemble_size, member));
    if (o.scorer_noise > 0.0) spec = corrupt_scorer(spec, o.scorer_noise, mix64(o.seed ^ 0xC0FFEEULL));
    corpus.scorer.spec = std::move(spec);
    corpus.scorer.dim = o.dim;
    corpus.scorer.vocab_path = "vocab.txt";
    return corpus;
}

Corpus generate_corpus(std::uint64_t seed, std::size_t n_utterances, const Vocabulary &vocab,
                       std::size_t min_words, std::size_t max_words, std::size_t dim) {
    if (vocab != make_synthetic_vocabulary(vocab.size()))
        throw Error("corpus: vocabulary must come from make_synthetic_vocabulary");
    CorpusOptions o;
    o.seed = seed;
    o.n_utterances = n_utterances;
    o.vocab_size = vocab.size();
    o.min_words = min_words;
    o.max_words = max_words;
    o.dim = dim;
    return generate_corpus(o);
}

ScorerSpec corrupt_scorer(const ScorerSpec &spec, double noise_level, std::uint64_t seed) {
    if (!(noise_level >= 0.0 && noise_level <= 1.0)) throw Error("corrupt_scorer: noise level must be in [0, 1]");
    if (noise_level == 0.0) return spec;
    ScorerSpec out = spec;
    if (out.kind == ScorerSpec::Kind::Synthetic) {
        out.synthetic.noise_level = noise_level;
        out.synthetic.noise_seed = seed;
        return out;
    }
    for (std::size_t i = 0; i < out.members.size(); ++i)
        out.members[i] = corrupt_scorer(out.members[i], noise_level, mix64(seed + i + 1));
    return out;
}

} // namespace streamdec
