#include "streamdec/error.hpp"
#include "streamdec/pipeline.hpp"
#include "streamdec/scorer_spec.hpp"
#include "streamdec/search.hpp"
#include "streamdec/synthesis.hpp"
#include "streamdec/text_format.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <limits>

using namespace streamdec;

namespace {

struct Fixture {
    Corpus corpus;
    std::shared_ptr<const Scorer> scorer;
};

Fixture make(std::uint64_t seed, std::size_t n = 8) {
    CorpusOptions o;
    o.seed = seed;
    o.n_utterances = n;
    Fixture f{generate_corpus(o), nullptr};
    f.scorer = build_scorer(f.corpus.scorer.spec, f.corpus.vocab, f.corpus.scorer.dim);
    return f;
}

TokenSeq concat(const SessionResult &r) {
    TokenSeq out;
    for (const auto &c : r.commits) out.insert(out.end(), c.tokens.begin(), c.tokens.end());
    return out;
}

SessionResult run(const Fixture &f, const Utterance &u, SessionConfig c) {
    SimulatedClock clock;
    return run_session(u.stream, c, *f.scorer, f.corpus.vocab, clock);
}

} // namespace

TEST(RunSession, EmptyStreamGivesSingleEmptyFlush) {
    auto f = make(1, 1);
    FeatureStream empty({}, 10.0, f.corpus.scorer.dim);
    SimulatedClock clock;
    auto r = run_session(empty, SessionConfig{}, *f.scorer, f.corpus.vocab, clock);
    ASSERT_EQ(r.commits.size(), 1u);
    EXPECT_EQ(r.commits[0].detector, Detector::Flush);
    EXPECT_TRUE(r.commits[0].tokens.empty());
    EXPECT_TRUE(r.final_tokens.empty());
    EXPECT_TRUE(r.final_words.empty());
}

TEST(RunSession, SharedOnlyMatchesOffline) {
    auto f = make(2);
    for (const auto &u : f.corpus.utterances) {
        auto r = run(f, u, SessionConfig{});
        auto offline = beam_search_offline(u.stream, *f.scorer, 8, 256);
        TokenSeq expected = offline.tokens;
        if (offline.finished) expected.pop_back();
        EXPECT_EQ(r.final_tokens, expected) << u.id;
        EXPECT_EQ(r.final_words, u.reference);
    }
}

TEST(RunSession, CombinedWithInfiniteThresholdIsSharedOnly) {
    auto f = make(3);
    SessionConfig shared;
    SessionConfig combined;
    combined.detector_mode = DetectorMode::Combined;
    combined.delta_threshold_ms = std::numeric_limits<double>::infinity();
    for (const auto &u : f.corpus.utterances) EXPECT_EQ(run(f, u, shared), run(f, u, combined));
}

TEST(RunSession, CommitsAssembleTranscriptMonotonically) {
    auto f = make(4);
    for (auto mode : {DetectorMode::SharedOnly, DetectorMode::EndpointOnly, DetectorMode::Combined}) {
        for (double chunk : {100.0, 300.0, 600.0}) {
            SessionConfig c;
            c.detector_mode = mode;
            c.chunk_ms = chunk;
            c.delta_threshold_ms = 150.0;
            for (const auto &u : f.corpus.utterances) {
                auto r = run(f, u, c);
                EXPECT_EQ(concat(r), r.final_tokens);
                EXPECT_EQ(tokens_to_words(f.corpus.vocab, r.final_tokens), r.final_words);
                for (std::size_t i = 0; i + 1 < r.commits.size(); ++i) {
                    EXPECT_FALSE(r.commits[i].tokens.empty());
                    EXPECT_LE(r.commits[i].commit_wall_ms, r.commits[i + 1].commit_wall_ms);
                    EXPECT_LE(r.commits[i].audio_consumed_ms, r.commits[i + 1].audio_consumed_ms);
                    EXPECT_GE(r.commits[i].commit_wall_ms, r.commits[i].audio_consumed_ms);
                }
                EXPECT_EQ(r.commits.back().detector, Detector::Flush);
                std::size_t words = 0;
                for (const auto &cm : r.commits) words += cm.words.size();
                EXPECT_EQ(words, r.final_words.size());
            }
        }
    }
}

TEST(RunSession, EndpointModeCommitsEarlier) {
    auto f = make(5, 4);
    SessionConfig c;
    c.detector_mode = DetectorMode::EndpointOnly;
    c.delta_threshold_ms = 0.0;
    bool early = false;
    for (const auto &u : f.corpus.utterances) {
        auto r = run(f, u, c);
        for (const auto &cm : r.commits) early |= cm.detector == Detector::ReliableEndpoint;
    }
    EXPECT_TRUE(early);
}

TEST(RunSession, DimensionMismatchFailsUpFront) {
    auto f = make(6, 1);
    auto bad = FeatureStream::from_rows({{1.0, 2.0}}, 10.0, 2);
    SimulatedClock clock;
    EXPECT_THROW(run_session(bad, SessionConfig{}, *f.scorer, f.corpus.vocab, clock), Error);
}

TEST(RunSession, ChunkSizeDoesNotChangeTranscript) {
    auto f = make(7);
    for (const auto &u : f.corpus.utterances) {
        SessionConfig a, b, c;
        a.chunk_ms = 100.0;
        b.chunk_ms = 300.0;
        c.chunk_ms = 600.0;
        auto ra = run(f, u, a);
        EXPECT_EQ(ra.final_tokens, run(f, u, b).final_tokens);
        EXPECT_EQ(ra.final_tokens, run(f, u, c).final_tokens);
    }
}

TEST(RunSessions, ParallelKeepsOrderAndMatchesSequential) {
    auto f = make(8, 12);
    std::vector<NamedStream> streams;
    for (const auto &u : f.corpus.utterances) streams.push_back({u.id, &u.stream});
    auto clock = [] { return make_clock(TimeMode::Simulated); };
    auto seq = run_sessions(streams, SessionConfig{}, *f.scorer, f.corpus.vocab, clock, 1);
    auto par = run_sessions(streams, SessionConfig{}, *f.scorer, f.corpus.vocab, clock, 4);
    EXPECT_EQ(seq, par);
}

TEST(CommitLog, RoundTripIsIdentity) {
    auto f = make(9, 3);
    SessionConfig c;
    c.detector_mode = DetectorMode::Combined;
    c.delta_threshold_ms = 100.0;
    std::string text;
    std::vector<SessionResult> results;
    for (const auto &u : f.corpus.utterances) {
        results.push_back(run(f, u, c));
        text += serialize_commit_log(u.id, results.back());
    }
    auto parsed = parse_commit_log(text);
    ASSERT_EQ(parsed.size(), results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        EXPECT_EQ(parsed[i].utt, f.corpus.utterances[i].id);
        EXPECT_EQ(parsed[i].result, results[i]);
    }
    auto path = std::filesystem::temp_directory_path() / "streamdec_log_test.log";
    write_file_atomic(path, serialize_commit_log("u", results[0]));
    EXPECT_EQ(replay_log(path).at(0).result, results[0]);
    EXPECT_EQ(replay_single(serialize_commit_log("u", results[0])), results[0]);
}

TEST(CommitLog, FieldsAndFormat) {
    SessionResult r;
    r.commits.push_back({{3, 4}, {"ab"}, 310.5, 300.0, Detector::SharedPrefix});
    r.commits.push_back({{}, {}, 1000.25, 1000.0, Detector::Flush});
    r.final_tokens = {3, 4};
    r.final_words = {"ab"};
    r.step_compute_ms = {10.5, 0.25};
    r.audio_duration_ms = 1000.0;
    auto text = serialize_commit_log("x1", r);
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "utt=x1\tcommit_wall_ms=310.500\taudio_consumed_ms=300.000\tdetector=shared\ttokens=3 4\twords=ab");
    EXPECT_EQ(replay_single(text), r);
}

TEST(CommitLog, RejectsOutOfOrderCommits) {
    std::string text = "utt=a\tcommit_wall_ms=500.000\taudio_consumed_ms=600.000\tdetector=shared\ttokens=1\twords=x\n"
                       "utt=a\tcommit_wall_ms=400.000\taudio_consumed_ms=300.000\tdetector=flush\ttokens=\twords=\n";
    try {
        parse_commit_log(text);
        FAIL();
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(CommitLog, MalformedLineReportsLineNumber) {
    std::string text = "utt=a\tcommit_wall_ms=5.000\taudio_consumed_ms=6.000\tdetector=shared\ttokens=1\twords=x\n"
                       "utt=a\tcommit_wall_ms=oops\taudio_consumed_ms=7.000\tdetector=flush\ttokens=\twords=\n";
    try {
        parse_commit_log(text);
        FAIL();
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(parse_commit_log("garbage\n"), ParseError);
}

TEST(CommitLog, EmptyLogIsEmptyResult) {
    EXPECT_TRUE(parse_commit_log("").empty());
    EXPECT_EQ(replay_single(""), SessionResult{});
}
