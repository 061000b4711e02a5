#include "streamdec/search.hpp"

#include "streamdec/error.hpp"
#include "streamdec/stability.hpp"

#include <algorithm>

namespace streamdec {

namespace {

double rank_key(double log_score, std::size_t length, bool length_normalized) {
    if (!length_normalized || length == 0) return log_score;
    return log_score / static_cast<double>(length);
}

struct Candidate {
    std::size_t parent;
    TokenId token; // -1: parent carried unchanged
    double log_score;
    double key;
};

// Lexicographic comparison of parent_a + [tok_a] against parent_b + [tok_b],
// where a token of -1 means "nothing appended".
bool sequence_less(const TokenSeq &pa, TokenId ta, const TokenSeq &pb, TokenId tb) {
    const std::size_t la = pa.size() + (ta >= 0 ? 1 : 0);
    const std::size_t lb = pb.size() + (tb >= 0 ? 1 : 0);
    const std::size_t n = std::min(la, lb);
    for (std::size_t i = 0; i < n; ++i) {
        TokenId a = i < pa.size() ? pa[i] : ta;
        TokenId b = i < pb.size() ? pb[i] : tb;
        if (a != b) return a < b;
    }
    return la < lb;
}

struct Extension {
    Beam beam;
    std::vector<bool> extended;
};

Extension extend(const Beam &beam, std::span<const std::optional<StepScore>> step_scores, std::size_t beam_size,
                 TokenId eos_id, bool length_normalized) {
    if (beam.hypotheses.empty()) throw Error("beam_extend: empty beam");
    if (step_scores.size() != beam.hypotheses.size())
        throw Error("beam_extend: step scores not aligned with hypotheses");
    if (beam_size == 0) throw Error("beam_extend: beam_size must be positive");

    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < beam.hypotheses.size(); ++i) {
        const auto &h = beam.hypotheses[i];
        const auto &score = step_scores[i];
        if (!score || h.finished) {
            candidates.push_back({i, -1, h.log_score, rank_key(h.log_score, h.tokens.size(), length_normalized)});
            continue;
        }
        for (std::size_t v = 0; v < score->log_probs.size(); ++v) {
            double s = h.log_score + score->log_probs[v];
            candidates.push_back({i, static_cast<TokenId>(v), s, rank_key(s, h.tokens.size() + 1, length_normalized)});
        }
    }
    auto better = [&](const Candidate &a, const Candidate &b) {
        if (a.key != b.key) return a.key > b.key;
        return sequence_less(beam.hypotheses[a.parent].tokens, a.token, beam.hypotheses[b.parent].tokens, b.token);
    };
    const std::size_t keep = std::min(beam_size, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      better);

    Extension out;
    out.beam.committed_prefix = beam.committed_prefix;
    out.beam.hypotheses.reserve(keep);
    out.extended.reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) {
        const auto &c = candidates[k];
        const auto &parent = beam.hypotheses[c.parent];
        if (c.token < 0) {
            out.beam.hypotheses.push_back(parent);
            out.extended.push_back(false);
            continue;
        }
        Hypothesis h = parent;
        const auto &score = *step_scores[c.parent];
        h.tokens.push_back(c.token);
        h.token_log_probs.push_back(score.log_probs[static_cast<std::size_t>(c.token)]);
        h.log_score = c.log_score;
        h.attention.push_back(score.attention);
        h.finished = c.token == eos_id;
        out.beam.hypotheses.push_back(std::move(h));
        out.extended.push_back(true);
    }
    return out;
}

bool can_extend(const Hypothesis &h, std::size_t max_tokens) { return !h.finished && h.tokens.size() < max_tokens; }

} // namespace

bool ranks_before(const Hypothesis &a, const Hypothesis &b, bool length_normalized) {
    double ka = rank_key(a.log_score, a.tokens.size(), length_normalized);
    double kb = rank_key(b.log_score, b.tokens.size(), length_normalized);
    if (ka != kb) return ka > kb;
    return std::lexicographical_compare(a.tokens.begin(), a.tokens.end(), b.tokens.begin(), b.tokens.end());
}

Beam beam_extend(const Beam &beam, std::span<const std::optional<StepScore>> step_scores, std::size_t beam_size,
                 TokenId eos_id, bool length_normalized) {
    return extend(beam, step_scores, beam_size, eos_id, length_normalized).beam;
}

const Hypothesis &best_hypothesis(const Beam &beam, bool length_normalized) {
    if (beam.hypotheses.empty()) throw Error("best_hypothesis: empty beam");
    const Hypothesis *best = nullptr;
    for (const auto &h : beam.hypotheses)
        if (h.finished && (!best || ranks_before(h, *best, length_normalized))) best = &h;
    return best ? *best : beam.hypotheses.front();
}

SearchRun run_beam_search(const Scorer &scorer, std::span<const FeatureFrame> features, Beam start,
                          const SearchOptions &options, bool to_completion, Clock *clock) {
    if (start.hypotheses.empty()) throw Error("search: empty start beam");
    SearchRun run;
    run.beam = std::move(start);
    run.history.push_back(run.beam);
    const bool norm = options.length_normalized;

    for (;;) {
        const auto &hyps = run.beam.hypotheses;
        bool any_open = false;
        double best_open = 0.0;
        for (const auto &h : hyps) {
            if (!can_extend(h, options.max_output_tokens)) continue;
            if (!any_open || h.log_score > best_open) best_open = h.log_score;
            any_open = true;
        }
        if (!any_open) break;
        if (!to_completion && hyps.front().finished) break;
        if (to_completion && !norm) {
            // Extensions never raise a raw score, so a finished hypothesis
            // that beats every open one is final.
            const Hypothesis &best = best_hypothesis(run.beam, false);
            if (best.finished && best.log_score > best_open) break;
        }

        std::vector<std::optional<StepScore>> scores(hyps.size());
        std::size_t calls = 0;
        for (std::size_t i = 0; i < hyps.size(); ++i) {
            if (!can_extend(hyps[i], options.max_output_tokens)) continue;
            scores[i] = score_step(scorer, features, hyps[i].tokens, options.max_output_tokens);
            ++calls;
        }
        run.scorer_calls += calls;
        if (clock) clock->on_scorer_calls(calls);

        auto next = extend(run.beam, scores, options.beam_size, scorer.eos_id(), norm);
        if (!to_completion) {
            auto it = std::find(next.extended.begin(), next.extended.end(), true);
            if (it != next.extended.end()) {
                const auto &fresh = next.beam.hypotheses[static_cast<std::size_t>(it - next.extended.begin())];
                const auto &att = fresh.attention.back();
                if (!att.empty() &&
                    estimate_endpoint(att, options.attention_mass_threshold) + 1 >= features.size())
                    break;
            }
        }
        run.beam = std::move(next.beam);
        run.history.push_back(run.beam);
    }
    return run;
}

Hypothesis beam_search_offline(const FeatureStream &stream, const Scorer &scorer, std::size_t beam_size,
                               std::size_t max_output_tokens, bool length_normalized) {
    if (stream.empty()) throw Error("offline search: empty stream");
    if (max_output_tokens == 0) throw Error("offline search: max_output_tokens must be positive");
    SearchOptions options;
    options.beam_size = beam_size;
    options.max_output_tokens = max_output_tokens;
    options.length_normalized = length_normalized;
    Beam start;
    start.hypotheses.push_back(Hypothesis{});
    auto run = run_beam_search(scorer, stream.frames(), std::move(start), options, true);
    return best_hypothesis(run.beam, length_normalized);
}

IncrementalSearch::IncrementalSearch(const Scorer &scorer, SearchOptions options)
    : scorer_(&scorer), options_(options) {
    if (options_.beam_size == 0) throw Error("beam_size must be positive");
    if (options_.max_output_tokens == 0) throw Error("max_output_tokens must be positive");
    anchor_.hypotheses.push_back(Hypothesis{});
    beam_ = anchor_;
    history_.push_back(anchor_);
}

Beam IncrementalSearch::rescored_anchor(Clock &clock, std::size_t &calls) const {
    Beam out = anchor_;
    const std::size_t from = committed_.size();
    for (auto &h : out.hypotheses) {
        for (std::size_t j = from; j < h.tokens.size(); ++j) {
            auto prefix = std::span<const TokenId>(h.tokens).first(j);
            auto score = score_step(*scorer_, frames_, prefix, options_.max_output_tokens);
            h.token_log_probs[j] = score.log_probs[static_cast<std::size_t>(h.tokens[j])];
            h.attention[j] = std::move(score.attention);
            ++calls;
        }
        double total = 0.0;
        for (double lp : h.token_log_probs) total += lp;
        h.log_score = total;
    }
    clock.on_scorer_calls(calls);
    std::sort(out.hypotheses.begin(), out.hypotheses.end(), [&](const Hypothesis &a, const Hypothesis &b) {
        return ranks_before(a, b, options_.length_normalized);
    });
    return out;
}

StepOutput IncrementalSearch::step(const Chunk &chunk, Clock &clock) {
    if (finalized_) throw Error("incremental search: chunk after flush");
    if (chunk.audio_end_ms < audio_end_ms_) throw Error("incremental search: chunk out of order");
    if (!chunk.frames.empty()) {
        if (chunk.frames.front().index != frames_.size())
            throw Error("incremental search: chunk out of order (expected frame " + std::to_string(frames_.size()) +
                        ", got " + std::to_string(chunk.frames.front().index) + ")");
        for (const auto &f : chunk.frames)
            if (f.values.size() != scorer_->dim()) throw Error("incremental search: feature dimension mismatch");
    }
    frames_.insert(frames_.end(), chunk.frames.begin(), chunk.frames.end());
    audio_end_ms_ = chunk.audio_end_ms;

    StepOutput out;
    const double t0 = clock.now_ms();
    if (frames_.empty()) {
        beam_ = anchor_;
        history_.assign(1, anchor_);
    } else {
        std::size_t calls = 0;
        Beam start = rescored_anchor(clock, calls);
        auto run = run_beam_search(*scorer_, frames_, std::move(start), options_, chunk.flush, &clock);
        out.extension_steps = run.history.size() - 1;
        beam_ = std::move(run.beam);
        history_ = std::move(run.history);
    }
    out.compute_ms = clock.now_ms() - t0;
    if (chunk.flush) finalized_ = true;
    out.beam = beam_;
    return out;
}

void IncrementalSearch::commit(std::span<const TokenId> tokens) {
    if (tokens.empty()) return;
    for (TokenId t : tokens)
        if (t == scorer_->eos_id()) throw Error("commit: eos cannot be committed");
    TokenSeq next = committed_;
    next.insert(next.end(), tokens.begin(), tokens.end());

    auto extends = [&](const Hypothesis &h) { return starts_with(h.tokens, next); };
    const Beam *chosen = nullptr;
    for (const auto &b : history_) {
        if (std::all_of(b.hypotheses.begin(), b.hypotheses.end(), extends)) {
            chosen = &b;
            break;
        }
    }
    Beam anchor;
    if (chosen) {
        anchor = *chosen;
    } else {
        for (const auto &h : history_.back().hypotheses)
            if (extends(h)) anchor.hypotheses.push_back(h);
    }
    if (anchor.hypotheses.empty()) throw Error("commit: no active hypothesis extends the committed prefix");
    committed_ = std::move(next);
    anchor.committed_prefix = committed_;
    anchor_ = std::move(anchor);
    beam_.committed_prefix = committed_;
    for (auto &b : history_) b.committed_prefix = committed_;
}

} // namespace streamdec
