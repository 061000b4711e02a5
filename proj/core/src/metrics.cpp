#include "streamdec/metrics.hpp"

#include "streamdec/error.hpp"
#include "streamdec/text_format.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace streamdec {

double word_latency(double u_w, double c_w, double d_w, double t_w) { return c_w + d_w + t_w - u_w; }

double LatencyDecomposition::unmatched_fraction() const {
    const double matched = static_cast<double>(words.size());
    double hyp = hyp_words ? 1.0 - matched / static_cast<double>(hyp_words) : 0.0;
    double ref = ref_words ? 1.0 - matched / static_cast<double>(ref_words) : 0.0;
    return std::max(hyp, ref);
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char &c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

struct TimedWord {
    std::string word;
    double consumed_ms;
    double wall_ms;
};

// Longest common subsequence alignment of hypothesis and reference words.
LatencyDecomposition match_session(const SessionResult &session, std::span<const WordAlignment> alignments) {
    std::vector<TimedWord> hyp;
    for (const auto &c : session.commits)
        for (const auto &w : c.words) hyp.push_back({w, c.audio_consumed_ms, c.commit_wall_ms});

    LatencyDecomposition out;
    out.hyp_words = hyp.size();
    out.ref_words = alignments.size();
    const std::size_t n = hyp.size(), m = alignments.size();
    std::vector<std::string> hl(n), rl(m);
    for (std::size_t i = 0; i < n; ++i) hl[i] = lower(hyp[i].word);
    for (std::size_t j = 0; j < m; ++j) rl[j] = lower(alignments[j].word);

    std::vector<std::size_t> table((n + 1) * (m + 1), 0);
    auto at = [&](std::size_t i, std::size_t j) -> std::size_t & { return table[i * (m + 1) + j]; };
    for (std::size_t i = n; i-- > 0;)
        for (std::size_t j = m; j-- > 0;)
            at(i, j) = hl[i] == rl[j] ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));

    std::size_t i = 0, j = 0;
    while (i < n && j < m) {
        if (hl[i] == rl[j]) {
            out.words.push_back({hyp[i].word, hyp[i].consumed_ms, hyp[i].wall_ms - hyp[i].consumed_ms,
                                 alignments[j].end_s * 1000.0, session.audio_duration_ms});
            ++i;
            ++j;
        } else if (at(i + 1, j) >= at(i, j + 1)) {
            out.unmatched.push_back("hyp:" + hyp[i++].word);
        } else {
            out.unmatched.push_back("ref:" + alignments[j++].word);
        }
    }
    for (; i < n; ++i) out.unmatched.push_back("hyp:" + hyp[i].word);
    for (; j < m; ++j) out.unmatched.push_back("ref:" + alignments[j].word);
    summarize(out);
    return out;
}

void check_tolerance(const LatencyDecomposition &d, double max_unmatched_fraction) {
    if (d.words.empty() && (d.hyp_words || d.ref_words)) throw Error("latency: no transcript word matches the alignment");
    if (d.unmatched_fraction() > max_unmatched_fraction) {
        std::string list;
        for (std::size_t k = 0; k < d.unmatched.size() && k < 20; ++k) list += (k ? " " : "") + d.unmatched[k];
        if (d.unmatched.size() > 20) list += " ...";
        throw Error("latency: " + std::to_string(d.unmatched.size()) + " unmatched words exceed tolerance: " + list);
    }
}

template <typename Fn> double mean_of(const std::vector<WordTiming> &words, Fn &&fn) {
    if (words.empty()) return 0.0;
    return std::transform_reduce(words.begin(), words.end(), 0.0, std::plus<>{}, fn) /
           static_cast<double>(words.size());
}

} // namespace

void summarize(LatencyDecomposition &d) {
    const auto &w = d.words;
    d.d_avg_ms = mean_of(w, [](const WordTiming &t) { return t.delay_ms; });
    d.c_avg_norm = mean_of(w, [](const WordTiming &t) { return t.consumed_ms / t.duration_ms; });
    d.u_avg_norm = mean_of(w, [](const WordTiming &t) { return t.uttered_ms / t.duration_ms; });
    d.c_avg_s = mean_of(w, [](const WordTiming &t) { return t.consumed_ms / 1000.0; });
    d.u_avg_s = mean_of(w, [](const WordTiming &t) { return t.uttered_ms / 1000.0; });
    d.mean_latency_s = mean_of(w, [](const WordTiming &t) {
        return word_latency(t.uttered_ms, t.consumed_ms, t.delay_ms) / 1000.0;
    });
}

LatencyDecomposition session_latency_decomposition(const SessionResult &session,
                                                   std::span<const WordAlignment> alignments,
                                                   double max_unmatched_fraction) {
    if (session.commits.empty()) throw Error("latency: session has no commits");
    if (!(session.audio_duration_ms > 0.0)) throw Error("latency: zero-length utterance");
    auto d = match_session(session, alignments);
    check_tolerance(d, max_unmatched_fraction);
    return d;
}

LatencyDecomposition pool_decompositions(std::span<const LatencyDecomposition> parts,
                                         double max_unmatched_fraction) {
    LatencyDecomposition out;
    for (const auto &p : parts) {
        out.words.insert(out.words.end(), p.words.begin(), p.words.end());
        out.unmatched.insert(out.unmatched.end(), p.unmatched.begin(), p.unmatched.end());
        out.hyp_words += p.hyp_words;
        out.ref_words += p.ref_words;
    }
    summarize(out);
    check_tolerance(out, max_unmatched_fraction);
    return out;
}

std::vector<double> normalized_end_times(std::span<const WordAlignment> alignments,
                                         const std::map<std::string, double> &durations_s) {
    std::vector<double> out;
    out.reserve(alignments.size());
    for (const auto &a : alignments) {
        auto it = durations_s.find(a.utt);
        if (it == durations_s.end()) throw Error("chart: no duration for utterance '" + a.utt + "'");
        if (!(it->second > 0.0)) throw Error("chart: zero-duration utterance '" + a.utt + "'");
        out.push_back(a.end_s / it->second);
    }
    return out;
}

ConversionChart build_conversion_chart(std::span<const double> end_times, std::span<const double> delta_grid) {
    if (end_times.empty()) throw Error("chart: no alignments");
    if (delta_grid.empty()) throw Error("chart: empty delta grid");
    if (!std::is_sorted(delta_grid.begin(), delta_grid.end())) throw Error("chart: delta grid must be ascending");
    ConversionChart chart;
    chart.delta_grid.assign(delta_grid.begin(), delta_grid.end());
    const double n = static_cast<double>(end_times.size());
    chart.u_avg = std::accumulate(end_times.begin(), end_times.end(), 0.0) / n;
    for (double delta : delta_grid) {
        double sum = 0.0;
        for (double u : end_times) sum += u + delta;
        chart.u_avg_shifted.push_back(sum / n);
    }
    return chart;
}

ConversionChart build_conversion_chart(std::span<const WordAlignment> alignments,
                                       const std::map<std::string, double> &durations_s,
                                       std::span<const double> delta_grid) {
    auto chart = build_conversion_chart(normalized_end_times(alignments, durations_s), delta_grid);
    double total = 0.0;
    for (const auto &[utt, d] : durations_s) total += d;
    chart.mean_duration_s = durations_s.empty() ? 0.0 : total / static_cast<double>(durations_s.size());
    return chart;
}

std::vector<double> default_delta_grid(double mean_duration_s, double max_s, double step_s) {
    if (!(mean_duration_s > 0.0)) throw Error("delta grid: mean duration must be positive");
    if (!(step_s > 0.0) || !(max_s >= 0.0)) throw Error("delta grid: bad range");
    std::vector<double> grid;
    const auto steps = static_cast<std::size_t>(std::floor(max_s / step_s + 1e-9));
    for (std::size_t k = 0; k <= steps; ++k) grid.push_back(static_cast<double>(k) * step_s / mean_duration_s);
    return grid;
}

ConfidenceLatency confidence_latency(double c_avg_norm, const ConversionChart &chart) {
    const auto &g = chart.delta_grid;
    const auto &v = chart.u_avg_shifted;
    if (g.empty() || g.size() != v.size()) throw Error("confidence latency: empty chart");
    ConfidenceLatency out;
    if (c_avg_norm <= v.front()) {
        out.delta_norm = g.front();
        out.clamped = c_avg_norm < v.front();
    } else if (c_avg_norm >= v.back()) {
        out.delta_norm = g.back();
        out.clamped = c_avg_norm > v.back();
    } else {
        auto hi = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), c_avg_norm) - v.begin());
        std::size_t lo = hi - 1;
        double span = v[hi] - v[lo];
        double t = span > 0.0 ? (c_avg_norm - v[lo]) / span : 0.0;
        out.delta_norm = g[lo] + t * (g[hi] - g[lo]);
    }
    out.delta_s = chart.delta_seconds(out.delta_norm);
    return out;
}

double rtf(double total_compute_ms, double audio_duration_ms) {
    if (!(audio_duration_ms > 0.0)) throw Error("rtf: audio duration must be positive");
    return total_compute_ms / audio_duration_ms;
}

std::size_t word_edit_distance(std::span<const std::string> reference, std::span<const std::string> hypothesis,
                               bool normalize_case) {
    auto same = [&](const std::string &a, const std::string &b) { return normalize_case ? lower(a) == lower(b) : a == b; };
    std::vector<std::size_t> prev(hypothesis.size() + 1), cur(hypothesis.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= reference.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= hypothesis.size(); ++j) {
            std::size_t sub = prev[j - 1] + (same(reference[i - 1], hypothesis[j - 1]) ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[hypothesis.size()];
}

double wer(std::span<const std::string> reference, std::span<const std::string> hypothesis, bool normalize_case) {
    if (reference.empty()) throw Error("wer: empty reference");
    return static_cast<double>(word_edit_distance(reference, hypothesis, normalize_case)) /
           static_cast<double>(reference.size());
}

SessionMetrics compute_metrics(std::span<const LoggedSession> sessions, std::span<const WordAlignment> alignments,
                               const References &references, const MetricsOptions &options) {
    if (sessions.empty()) throw Error("metrics: no sessions");
    std::map<std::string, double> durations_s;
    std::map<std::string, std::vector<WordAlignment>> by_utt;
    for (const auto &a : alignments) by_utt[a.utt].push_back(a);

    std::vector<LatencyDecomposition> parts;
    std::vector<WordAlignment> chart_words;
    double compute_ms = 0.0, audio_ms = 0.0;
    std::size_t edits = 0, ref_words = 0;
    for (const auto &s : sessions) {
        if (!(s.result.audio_duration_ms > 0.0)) throw Error("metrics: zero-length utterance '" + s.utt + "'");
        durations_s[s.utt] = s.result.audio_duration_ms / 1000.0;
        compute_ms += s.result.total_compute_ms();
        audio_ms += s.result.audio_duration_ms;
        auto ref = references.find(s.utt);
        if (ref == references.end()) throw Error("metrics: no reference for '" + s.utt + "'");
        edits += word_edit_distance(ref->second, s.result.final_words, options.normalize_case);
        ref_words += ref->second.size();
        const auto &aligned = by_utt[s.utt];
        chart_words.insert(chart_words.end(), aligned.begin(), aligned.end());
        parts.push_back(match_session(s.result, aligned));
    }
    if (ref_words == 0) throw Error("metrics: references are empty");
    auto pooled = pool_decompositions(parts, options.max_unmatched_fraction);

    double mean_duration = 0.0;
    for (const auto &[utt, d] : durations_s) mean_duration += d;
    mean_duration /= static_cast<double>(durations_s.size());
    auto chart = build_conversion_chart(chart_words, durations_s,
                                        default_delta_grid(mean_duration, options.grid_max_s, options.grid_step_s));
    auto delay = confidence_latency(pooled.c_avg_norm, chart);

    SessionMetrics m;
    m.d_avg_ms = pooled.d_avg_ms;
    m.c_avg_norm = pooled.c_avg_norm;
    m.confidence_latency_s = delay.delta_s;
    m.latency_clamped = delay.clamped;
    m.rtf = rtf(compute_ms, audio_ms);
    m.wer = static_cast<double>(edits) / static_cast<double>(ref_words);
    m.matched_words = pooled.words.size();
    m.unmatched_words = pooled.unmatched.size();
    return m;
}

std::string format_metrics_report(const SessionMetrics &m) {
    std::string out;
    out += "d_avg_ms=" + format_double(m.d_avg_ms) + "\n";
    out += "rtf=" + format_double(m.rtf) + "\n";
    out += "c_avg_norm=" + format_double(m.c_avg_norm) + "\n";
    out += "confidence_latency_s=" + format_double(m.confidence_latency_s) + "\n";
    out += "wer=" + format_double(m.wer) + "\n";
    out += "matched_words=" + std::to_string(m.matched_words) + "\n";
    out += "unmatched_words=" + std::to_string(m.unmatched_words) + "\n";
    out += std::string("latency_clamped=") + (m.latency_clamped ? "1" : "0") + "\n";
    return out;
}

std::vector<WordAlignment> corpus_alignments(const Corpus &corpus) {
    std::vector<WordAlignment> out;
    for (const auto &u : corpus.utterances) out.insert(out.end(), u.alignment.begin(), u.alignment.end());
    return out;
}

References corpus_references(const Corpus &corpus) {
    References refs;
    for (const auto &u : corpus.utterances) refs[u.id] = u.reference;
    return refs;
}

std::vector<LoggedSession> decode_corpus(const Corpus &corpus, const Scorer &scorer, const SessionConfig &config,
                                         std::size_t jobs, TimeMode time_mode) {
    std::vector<NamedStream> streams;
    for (const auto &u : corpus.utterances) streams.push_back({u.id, &u.stream});
    auto results = run_sessions(streams, config, scorer, corpus.vocab, [time_mode] { return make_clock(time_mode); },
                                jobs);
    std::vector<LoggedSession> out;
    for (std::size_t i = 0; i < results.size(); ++i) out.push_back({streams[i].utt, std::move(results[i])});
    return out;
}

std::vector<TradeoffPoint> tradeoff_sweep(const Corpus &corpus, const Scorer &scorer, SessionConfig base,
                                          std::span<const double> delta_thresholds, const MetricsOptions &options,
                                          std::size_t jobs, TimeMode time_mode) {
    if (delta_thresholds.empty()) throw Error("sweep: no thresholds");
    const auto alignments = corpus_alignments(corpus);
    const auto references = corpus_references(corpus);
    std::vector<TradeoffPoint> points;
    for (double threshold : delta_thresholds) {
        SessionConfig config = base;
        config.delta_threshold_ms = threshold;
        auto sessions = decode_corpus(corpus, scorer, config, jobs, time_mode);
        auto m = compute_metrics(sessions, alignments, references, options);
        points.push_back({threshold, m.confidence_latency_s, m.wer, m.c_avg_norm});
    }
    return points;
}

} // namespace streamdec
