#pragma once

#include "streamdec/clock.hpp"
#include "streamdec/features.hpp"
#include "streamdec/scoring.hpp"
#include "streamdec/session_config.hpp"
#include "streamdec/vocabulary.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace streamdec {

struct SessionResult {
    std::vector<CommitRecord> commits;
    TokenSeq final_tokens;
    std::vector<std::string> final_words;
    std::vector<double> step_compute_ms;
    double audio_duration_ms = 0.0;

    double total_compute_ms() const;
    bool operator==(const SessionResult &) const = default;
};

// Chunk wait, incremental inference, stability detection, commit; repeated
// until the flush chunk, whose best hypothesis commits unconditionally.
//
// Time runs on a virtual session timeline starting at 0 with the audio: a
// chunk is processed at max(previous commit time, chunk arrival) and takes
// the compute time measured by `clock` (real or simulated).
SessionResult run_session(const FeatureStream &stream, const SessionConfig &config, const Scorer &scorer,
                          const Vocabulary &vocab, Clock &clock);

enum class TimeMode { Simulated, Wall };

// Fresh per-session clock for the mode.
std::unique_ptr<Clock> make_clock(TimeMode mode);

struct NamedStream {
    std::string utt;
    const FeatureStream *stream;
};

// Runs one session per stream on up to `jobs` threads; results keep input order.
std::vector<SessionResult> run_sessions(std::span<const NamedStream> streams, const SessionConfig &config,
                                        const Scorer &scorer, const Vocabulary &vocab,
                                        const std::function<std::unique_ptr<Clock>()> &make_session_clock,
                                        std::size_t jobs = 1);

// Commit log: tab-separated records, one per line, fields in fixed order.
//   utt=<id> commit_wall_ms=<f> audio_consumed_ms=<f> detector=<shared|endpoint|flush> tokens=<ids> words=<words>
// followed by one session summary line per utterance:
//   session utt=<id> audio_duration_ms=<f> step_compute_ms=<f f ...>
std::string serialize_commit_log(const std::string &utt, const SessionResult &result);

struct LoggedSession {
    std::string utt;
    SessionResult result;
};
std::vector<LoggedSession> parse_commit_log(std::string_view text);
std::vector<LoggedSession> replay_log(const std::filesystem::path &path);
// Single-session convenience: an empty log yields an empty result.
SessionResult replay_single(std::string_view text);

} // namespace streamdec
