#include "streamdec/error.hpp"
#include "streamdec/scorer_spec.hpp"
#include "streamdec/scoring.hpp"
#include "streamdec/search.hpp"
#include "streamdec/stability.hpp"
#include "streamdec/synthesis.hpp"
#include "streamdec/synthetic_scorer.hpp"
#include "streamdec/text_format.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace streamdec;

namespace {

FeatureStream random_stream(std::uint64_t seed, std::size_t frames, std::size_t dim) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> rows(frames, std::vector<double>(dim));
    for (auto &r : rows)
        for (double &x : r) x = u(rng);
    return FeatureStream::from_rows(std::move(rows), 10.0, dim);
}

double attention_mass(const Attention &a) {
    double m = 0.0;
    for (double w : a.weights()) m += w;
    return m;
}

} // namespace

TEST(Logsumexp, Basic) {
    std::vector<double> v{std::log(0.25), std::log(0.75)};
    EXPECT_NEAR(logsumexp(v), 0.0, 1e-15);
}

TEST(SyntheticScorer, NormalizedAndDeterministic) {
    auto vocab = make_synthetic_vocabulary(20);
    auto scorer = build_synthetic_scorer(3, vocab, 6);
    auto s = random_stream(9, 80, 6);
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        TokenSeq prefix;
        std::size_t len = rng() % 9;
        for (std::size_t i = 0; i < len; ++i) prefix.push_back(static_cast<TokenId>(1 + rng() % 19));
        auto a = score_step(*scorer, s.frames(), prefix, 256);
        auto b = score_step(*scorer, s.frames(), prefix, 256);
        EXPECT_EQ(a, b);
        EXPECT_NEAR(logsumexp(a.log_probs), 0.0, 1e-6);
        EXPECT_NEAR(attention_mass(a.attention), 1.0, 1e-6);
    }
}

TEST(SyntheticScorer, PrefixConsistency) {
    auto vocab = make_synthetic_vocabulary(16);
    SyntheticParams p;
    p.seed = 5;
    p.noise_level = 0.7;
    p.noise_seed = 11;
    SyntheticScorer scorer(p, vocab.size(), vocab.eos_id(), 4);
    auto s = random_stream(2, 120, 4);
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        TokenSeq prefix;
        std::size_t len = rng() % 12;
        for (std::size_t i = 0; i < len; ++i) prefix.push_back(static_cast<TokenId>(1 + rng() % 15));
        const std::size_t e = scorer.endpoint_frame(prefix.size());
        auto full = scorer.score(s.frames(), prefix);
        auto cut = scorer.score(s.frames().first(e + 1), prefix);
        EXPECT_EQ(full, cut);
        EXPECT_EQ(full.attention.end_frame(), e + 1);
        EXPECT_EQ(estimate_endpoint(full.attention, 0.95), e);
    }
}

TEST(SyntheticScorer, MissingFramesPutMassOnLastFrame) {
    auto vocab = make_synthetic_vocabulary(8);
    auto scorer = build_synthetic_scorer(1, vocab, 3);
    auto s = random_stream(1, 10, 3);
    TokenSeq prefix{1};
    auto out = scorer->score(s.frames(), prefix);
    EXPECT_EQ(out.attention, Attention::point(9));
}

TEST(SyntheticScorer, RejectsBadDimension) {
    auto vocab = make_synthetic_vocabulary(8);
    EXPECT_THROW(build_synthetic_scorer(1, vocab, 0), Error);
}

TEST(ScoreStep, ValidatesInputs) {
    auto vocab = make_synthetic_vocabulary(8);
    auto scorer = build_synthetic_scorer(1, vocab, 3);
    auto s = random_stream(1, 20, 3);
    auto wrong_dim = random_stream(1, 20, 4);
    TokenSeq prefix{1, 2};
    EXPECT_THROW(score_step(*scorer, {}, prefix, 10), Error);
    EXPECT_THROW(score_step(*scorer, wrong_dim.frames(), prefix, 10), Error);
    EXPECT_THROW(score_step(*scorer, s.frames(), prefix, 2), Error);
    TokenSeq with_eos{1, vocab.eos_id()};
    EXPECT_THROW(score_step(*scorer, s.frames(), with_eos, 10), Error);
    TokenSeq unknown{99};
    EXPECT_THROW(score_step(*scorer, s.frames(), unknown, 10), Error);
}

TEST(Ensemble, CombineArithmeticMean) {
    StepScore a{{-1.0, -2.0}, Attention::point(0)};
    StepScore b{{-3.0, -2.0}, Attention::point(1)};
    std::vector<StepScore> scores{a, b};
    std::vector<double> w{0.5, 0.5};
    auto c = ensemble_combine(scores, w);
    EXPECT_NEAR(c.log_probs[0], std::log(0.5), 1e-12);
    EXPECT_NEAR(c.log_probs[1], std::log(0.5), 1e-12);
    EXPECT_NEAR(c.attention.at(0), 0.5, 1e-12);
    EXPECT_NEAR(c.attention.at(1), 0.5, 1e-12);
}

TEST(Ensemble, SingleAndIdenticalMembersAreIdentity) {
    std::vector<double> lp{std::log(0.2), std::log(0.3), std::log(0.5)};
    StepScore a{lp, Attention(2, {0.25, 0.75})};
    std::vector<StepScore> one{a};
    std::vector<double> w1{1.0};
    auto c1 = ensemble_combine(one, w1);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(c1.log_probs[i], lp[i], 1e-12);
    EXPECT_EQ(c1.attention, a.attention);
    std::vector<StepScore> two{a, a};
    std::vector<double> w2{0.5, 0.5};
    auto c2 = ensemble_combine(two, w2);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(c2.log_probs[i], lp[i], 1e-12);
}

TEST(Ensemble, Errors) {
    StepScore a{{-1.0, -2.0}, Attention::point(0)};
    StepScore b{{-1.0}, Attention::point(0)};
    std::vector<StepScore> mismatch{a, b};
    std::vector<double> w{0.5, 0.5};
    EXPECT_THROW(ensemble_combine(mismatch, w), Error);
    std::vector<StepScore> ok{a, a};
    std::vector<double> neg{1.5, -0.5};
    EXPECT_THROW(ensemble_combine(ok, neg), Error);
}

TEST(Ensemble, ScorerIdentityAndPermutationInvariance) {
    auto vocab = make_synthetic_vocabulary(12);
    auto s = random_stream(3, 60, 5);
    auto m0 = build_synthetic_scorer(1, vocab, 5);
    auto m1 = build_synthetic_scorer(2, vocab, 5);
    auto m2 = build_synthetic_scorer(3, vocab, 5);
    EnsembleScorer solo({m0}, {1.0});
    EnsembleScorer abc({m0, m1, m2}, {0.2, 0.3, 0.5}, -1);
    EnsembleScorer cba({m2, m1, m0}, {0.5, 0.3, 0.2}, -1);
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        TokenSeq prefix;
        for (std::size_t i = 0, n = rng() % 6; i < n; ++i) prefix.push_back(static_cast<TokenId>(1 + rng() % 11));
        auto ref = m0->score(s.frames(), prefix);
        auto one = solo.score(s.frames(), prefix);
        ASSERT_EQ(one.log_probs.size(), ref.log_probs.size());
        for (std::size_t v = 0; v < ref.log_probs.size(); ++v) EXPECT_NEAR(one.log_probs[v], ref.log_probs[v], 1e-12);
        EXPECT_EQ(one.attention, ref.attention);
        auto x = abc.score(s.frames(), prefix);
        auto y = cba.score(s.frames(), prefix);
        for (std::size_t v = 0; v < x.log_probs.size(); ++v) EXPECT_NEAR(x.log_probs[v], y.log_probs[v], 1e-12);
        EXPECT_NEAR(logsumexp(x.log_probs), 0.0, 1e-6);
    }
}

TEST(Ensemble, DesignatedAttentionMember) {
    auto vocab = make_synthetic_vocabulary(12);
    auto s = random_stream(3, 60, 5);
    SyntheticParams p0, p1;
    p0.seed = 1;
    p1.seed = 2;
    p1.frames_per_token = 5;
    auto m0 = std::make_shared<SyntheticScorer>(p0, vocab.size(), vocab.eos_id(), 5);
    auto m1 = std::make_shared<SyntheticScorer>(p1, vocab.size(), vocab.eos_id(), 5);
    EnsembleScorer e({m0, m1}, {0.5, 0.5}, 1);
    TokenSeq prefix{1, 2};
    EXPECT_EQ(e.score(s.frames(), prefix).attention, m1->score(s.frames(), prefix).attention);
}

TEST(ScorerConfig, RoundTripAndErrors) {
    ScorerConfig cfg;
    cfg.dim = 7;
    cfg.vocab_path = "vocab.txt";
    ScorerSpec a;
    a.synthetic.seed = 4;
    a.synthetic.noise_level = 0.25;
    ScorerSpec b;
    b.synthetic.seed = 9;
    cfg.spec = uniform_ensemble({a, b});
    cfg.spec.attention_member = -1;
    auto text = cfg.serialize();
    EXPECT_NE(text.find("member.1.seed=9"), std::string::npos);
    EXPECT_EQ(ScorerConfig::parse(text), cfg);

    try {
        ScorerConfig::parse("kind=synthetic\ndim=3\nvocab=v.txt\nbogus=1\n");
        FAIL();
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 4u);
    }
    EXPECT_THROW(ScorerConfig::parse("kind=ensemble\ndim=3\nvocab=v.txt\n"), Error);
    EXPECT_THROW(ScorerConfig::parse("kind=magic\ndim=3\nvocab=v.txt\n"), ParseError);
}

TEST(ScorerConfig, LoadResolvesVocabularyRelativeToFile) {
    auto dir = std::filesystem::temp_directory_path() / "streamdec_cfg_test";
    std::filesystem::create_directories(dir);
    auto vocab = make_synthetic_vocabulary(10);
    write_file_atomic(dir / "v.txt", vocab.serialize());
    write_file_atomic(dir / "s.cfg", "# test\nkind=synthetic\nseed=3\ndim=4\nvocab=v.txt\n");
    auto loaded = load_scorer(dir / "s.cfg");
    EXPECT_EQ(loaded.vocab, vocab);
    EXPECT_EQ(loaded.scorer->dim(), 4u);
    EXPECT_EQ(loaded.scorer->vocab_size(), 10u);
}

TEST(SyntheticScorer, PlantedSequenceOfSeedSevenMatchesExhaustive) {
    // vocab 5 (eos + 4), utterances of at most 6 tokens including eos.
    auto vocab = make_synthetic_vocabulary(5);
    auto corpus = generate_corpus(7, 5, vocab, 1, 2, 8);
    auto scorer = build_scorer(corpus.scorer.spec, vocab, corpus.scorer.dim);
    std::size_t checked = 0;
    for (const auto &u : corpus.utterances) {
        if (u.planted.size() + 1 > 6) continue;
        auto best = oracle::exhaustive_search(*scorer, u.stream.frames(), 6);
        TokenSeq planted = u.planted;
        planted.push_back(vocab.eos_id());
        EXPECT_EQ(best.tokens, planted);
        auto beam = beam_search_offline(u.stream, *scorer, 8, 6);
        EXPECT_EQ(beam.tokens, planted);
        ++checked;
    }
    EXPECT_GT(checked, 0u);
}
