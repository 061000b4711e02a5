#include "streamdec/metrics.hpp"
#include "streamdec/pipeline.hpp"
#include "streamdec/scorer_spec.hpp"
#include "streamdec/search.hpp"
#include "streamdec/synthesis.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace streamdec;

namespace {

struct Setup {
    Corpus corpus;
    std::shared_ptr<const Scorer> scorer;
};

const Setup &setup(std::size_t ensemble = 1) {
    static std::map<std::size_t, Setup> cache;
    auto it = cache.find(ensemble);
    if (it == cache.end()) {
        CorpusOptions o;
        o.seed = 3;
        o.n_utterances = 16;
        o.ensemble_size = ensemble;
        o.scorer_noise = ensemble > 1 ? 0.3 : 0.0;
        Setup s{generate_corpus(o), nullptr};
        s.scorer = build_scorer(s.corpus.scorer.spec, s.corpus.vocab, s.corpus.scorer.dim);
        it = cache.emplace(ensemble, std::move(s)).first;
    }
    return it->second;
}

void BM_ScorerStep(benchmark::State &state) {
    const auto &s = setup(static_cast<std::size_t>(state.range(0)));
    const auto &u = s.corpus.utterances[0];
    TokenSeq prefix(u.planted.begin(), u.planted.begin() + static_cast<std::ptrdiff_t>(u.planted.size() / 2));
    for (auto _ : state) benchmark::DoNotOptimize(s.scorer->score(u.stream.frames(), prefix));
}
BENCHMARK(BM_ScorerStep)->Arg(1)->Arg(4);

void BM_BeamExtend(benchmark::State &state) {
    const auto &s = setup();
    const auto &u = s.corpus.utterances[0];
    const auto beam_size = static_cast<std::size_t>(state.range(0));
    SearchOptions opts;
    opts.beam_size = beam_size;
    Beam start{{Hypothesis{}}, {}};
    // Two steps in, so the beam is full.
    auto run = run_beam_search(*s.scorer, u.stream.frames().first(16), start, opts, false);
    const Beam &beam = run.beam;
    std::vector<std::optional<StepScore>> scores;
    for (const auto &h : beam.hypotheses)
        scores.emplace_back(h.finished ? std::nullopt
                                       : std::optional<StepScore>(s.scorer->score(u.stream.frames(), h.tokens)));
    for (auto _ : state)
        benchmark::DoNotOptimize(beam_extend(beam, scores, beam_size, s.corpus.vocab.eos_id()));
}
BENCHMARK(BM_BeamExtend)->Arg(4)->Arg(8)->Arg(16);

void BM_OfflineSearch(benchmark::State &state) {
    const auto &s = setup();
    const auto beam = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        for (const auto &u : s.corpus.utterances)
            benchmark::DoNotOptimize(beam_search_offline(u.stream, *s.scorer, beam, 256));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.corpus.utterances.size()));
}
BENCHMARK(BM_OfflineSearch)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Session(benchmark::State &state) {
    const auto &s = setup();
    SessionConfig c;
    c.detector_mode = static_cast<DetectorMode>(state.range(0));
    c.chunk_ms = static_cast<double>(state.range(1));
    c.delta_threshold_ms = 300.0;
    double audio_ms = 0.0;
    for (auto _ : state) {
        for (const auto &u : s.corpus.utterances) {
            SimulatedClock clock;
            benchmark::DoNotOptimize(run_session(u.stream, c, *s.scorer, s.corpus.vocab, clock));
            audio_ms += u.stream.duration_ms();
        }
    }
    state.counters["audio_s_per_s"] = benchmark::Counter(audio_ms / 1000.0, benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Session)
    ->ArgsProduct({{static_cast<int>(DetectorMode::SharedOnly), static_cast<int>(DetectorMode::Combined)},
                   {100, 300}})
    ->Unit(benchmark::kMillisecond);

void BM_CorpusMetrics(benchmark::State &state) {
    const auto &s = setup();
    auto sessions = decode_corpus(s.corpus, *s.scorer, SessionConfig{});
    auto alignments = corpus_alignments(s.corpus);
    auto refs = corpus_references(s.corpus);
    for (auto _ : state) benchmark::DoNotOptimize(compute_metrics(sessions, alignments, refs, MetricsOptions{}));
}
BENCHMARK(BM_CorpusMetrics)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
