#pragma once

#include "streamdec/clock.hpp"
#include "streamdec/features.hpp"
#include "streamdec/hypothesis.hpp"
#include "streamdec/scoring.hpp"

#include <optional>
#include <span>
#include <vector>

namespace streamdec {

struct SearchOptions {
    std::size_t beam_size = 8;
    std::size_t max_output_tokens = 256;
    double attention_mass_threshold = 0.95;
    bool length_normalized = false;
};

// Ranking used by the search. With length normalization the key is the mean
// per-token log probability; ties still fall back to token order.
bool ranks_before(const Hypothesis &a, const Hypothesis &b, bool length_normalized);

// All single-token extensions of every hypothesis that has a step score,
// plus the hypotheses without one (finished ones) carried unchanged; the
// best beam_size survive. step_scores is aligned with beam.hypotheses.
Beam beam_extend(const Beam &beam, std::span<const std::optional<StepScore>> step_scores, std::size_t beam_size,
                 TokenId eos_id, bool length_normalized = false);

// The best finished hypothesis, or the top one when none has finished.
const Hypothesis &best_hypothesis(const Beam &beam, bool length_normalized = false);

struct SearchRun {
    Beam beam;
    // Beams after every accepted extension step; history.front() is the start beam.
    std::vector<Beam> history;
    std::size_t scorer_calls = 0;
};

// Extends `start` over `features`. With `to_completion`, runs until every
// hypothesis is finished, the best finished one outscores every unfinished
// one, or the length cap is hit. Otherwise it also stops once the top
// hypothesis is finished, and it discards (and stops at) a step whose best
// new token has its endpoint on the last available frame: that token may
// still depend on audio that has not arrived.
SearchRun run_beam_search(const Scorer &scorer, std::span<const FeatureFrame> features, Beam start,
                          const SearchOptions &options, bool to_completion, Clock *clock = nullptr);

Hypothesis beam_search_offline(const FeatureStream &stream, const Scorer &scorer, std::size_t beam_size,
                               std::size_t max_output_tokens, bool length_normalized = false);

struct StepOutput {
    Beam beam;
    double compute_ms = 0.0;
    std::size_t extension_steps = 0;
};

// Per-session incremental decoder. Each chunk is appended to the audio seen
// so far; the unstable hypotheses are then rescored over all of it and
// extended again, starting from the committed prefix.
//
// The restart point is the anchor beam: the earliest beam of the previous
// step in which every member extends the committed prefix. Restarting from
// the bare prefix instead would re-admit extensions that the full search had
// already pruned in favour of competitors that have since died out.
class IncrementalSearch {
public:
    IncrementalSearch(const Scorer &scorer, SearchOptions options);

    // Chunks must arrive in order; nothing may follow the flush chunk.
    StepOutput step(const Chunk &chunk, Clock &clock);

    // Appends `tokens` to the committed prefix; every later beam extends it.
    void commit(std::span<const TokenId> tokens);

    const TokenSeq &committed() const noexcept { return committed_; }
    const Beam &beam() const noexcept { return beam_; }
    std::span<const FeatureFrame> frames() const noexcept { return frames_; }
    bool finalized() const noexcept { return finalized_; }
    double audio_end_ms() const noexcept { return audio_end_ms_; }
    const SearchOptions &options() const noexcept { return options_; }

private:
    Beam rescored_anchor(Clock &clock, std::size_t &calls) const;

    const Scorer *scorer_;
    SearchOptions options_;
    std::vector<FeatureFrame> frames_;
    TokenSeq committed_;
    Beam anchor_;
    Beam beam_;
    std::vector<Beam> history_;
    double audio_end_ms_ = 0.0;
    bool finalized_ = false;
};

} // namespace streamdec
