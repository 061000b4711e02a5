#include "streamdec/pipeline.hpp"

#include "streamdec/error.hpp"
#include "streamdec/search.hpp"
#include "streamdec/stability.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace streamdec {

double SessionResult::total_compute_ms() const {
    double total = 0.0;
    for (double c : step_compute_ms) total += c;
    return total;
}

namespace {

// Attaches each word to the commit holding its last token.
void assign_words(SessionResult &result, const Vocabulary &vocab) {
    auto spans = word_spans(vocab, result.final_tokens);
    std::size_t commit = 0, commit_end = 0;
    if (!result.commits.empty()) commit_end = result.commits.front().tokens.size();
    for (auto &c : result.commits) c.words.clear();
    for (auto &span : spans) {
        while (commit + 1 < result.commits.size() && span.last_token >= commit_end) {
            ++commit;
            commit_end += result.commits[commit].tokens.size();
        }
        result.commits[commit].words.push_back(span.word);
        result.final_words.push_back(std::move(span.word));
    }
}

} // namespace

SessionResult run_session(const FeatureStream &stream, const SessionConfig &config, const Scorer &scorer,
                          const Vocabulary &vocab, Clock &clock) {
    config.validate();
    if (stream.dim() != scorer.dim())
        throw Error("stream dimension " + std::to_string(stream.dim()) + " does not match scorer dimension " +
                    std::to_string(scorer.dim()));
    if (vocab.size() != scorer.vocab_size() || vocab.eos_id() != scorer.eos_id())
        throw Error("vocabulary does not match scorer");

    SearchOptions options;
    options.beam_size = config.beam_size;
    options.max_output_tokens = config.max_output_tokens;
    options.attention_mass_threshold = config.attention_mass_threshold;
    options.length_normalized = config.length_normalized;
    IncrementalSearch search(scorer, options);

    SessionResult result;
    result.audio_duration_ms = stream.duration_ms();
    double timeline = 0.0;
    for (const auto &chunk : chunk_stream(stream, config.chunk_ms)) {
        const double start = std::max(timeline, chunk.arrival_wall_ms);
        auto step = search.step(chunk, clock);
        result.step_compute_ms.push_back(step.compute_ms);
        timeline = start + step.compute_ms;

        CommitRecord record;
        record.commit_wall_ms = timeline;
        record.audio_consumed_ms = chunk.audio_end_ms;
        if (chunk.flush) {
            const auto &best = best_hypothesis(step.beam, config.length_normalized);
            auto from = static_cast<std::ptrdiff_t>(search.committed().size());
            record.tokens.assign(best.tokens.begin() + from, best.tokens.end());
            if (best.finished && !record.tokens.empty()) record.tokens.pop_back();
            record.detector = Detector::Flush;
        } else {
            DetectionContext ctx{&vocab, chunk.audio_end_ms, stream.frame_period_ms(), config.delta_threshold_ms,
                                 config.attention_mass_threshold};
            auto detection = detect(step.beam, config.detector_mode, ctx);
            if (!detection.detector) continue;
            record.tokens = std::move(detection.tokens);
            record.detector = *detection.detector;
        }
        search.commit(record.tokens);
        result.final_tokens.insert(result.final_tokens.end(), record.tokens.begin(), record.tokens.end());
        result.commits.push_back(std::move(record));
    }
    assign_words(result, vocab);
    return result;
}

std::unique_ptr<Clock> make_clock(TimeMode mode) {
    if (mode == TimeMode::Wall) return std::make_unique<SteadyClock>();
    return std::make_unique<SimulatedClock>();
}

std::vector<SessionResult> run_sessions(std::span<const NamedStream> streams, const SessionConfig &config,
                                        const Scorer &scorer, const Vocabulary &vocab,
                                        const std::function<std::unique_ptr<Clock>()> &make_session_clock,
                                        std::size_t jobs) {
    std::vector<SessionResult> results(streams.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= streams.size()) return;
            try {
                auto clock = make_session_clock();
                results[i] = run_session(*streams[i].stream, config, scorer, vocab, *clock);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = streams.size();
            }
        }
    };
    jobs = std::max<std::size_t>(1, std::min(jobs, streams.size()));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

} // namespace streamdec
