#pragma once

#include "streamdec/corpus.hpp"
#include "streamdec/pipeline.hpp"
#include "streamdec/scoring.hpp"

#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace streamdec {

// User-perceived latency of one word: C + D + T - U (transmission T is
// usually negligible).
double word_latency(double u_w, double c_w, double d_w, double t_w = 0.0);

// Timing of one transcript word matched to its reference alignment, in ms.
struct WordTiming {
    std::string word;
    double consumed_ms = 0.0; // C_w: audio position of the committing chunk
    double delay_ms = 0.0;    // D_w: commit wall time minus that audio position
    double uttered_ms = 0.0;  // U_w: reference word end
    double duration_ms = 0.0; // utterance length, for normalization
};

struct LatencyDecomposition {
    std::vector<WordTiming> words;
    std::size_t hyp_words = 0;
    std::size_t ref_words = 0;
    std::vector<std::string> unmatched; // hypothesis and reference words left over

    double d_avg_ms = 0.0;
    double c_avg_norm = 0.0;
    double u_avg_norm = 0.0;
    double c_avg_s = 0.0;
    double u_avg_s = 0.0;
    double mean_latency_s = 0.0; // mean of word_latency over matched words

    double unmatched_fraction() const;
};

// Matches committed words to reference alignments (case-insensitive, in
// order) and averages the per-word terms. Throws when no words match or when
// more than max_unmatched_fraction of either side is left unmatched.
LatencyDecomposition session_latency_decomposition(const SessionResult &session,
                                                   std::span<const WordAlignment> alignments,
                                                   double max_unmatched_fraction = 0.05);

// Pools matched words of several sessions and recomputes the averages.
LatencyDecomposition pool_decompositions(std::span<const LatencyDecomposition> parts,
                                         double max_unmatched_fraction = 0.05);

// Recomputes the averages from `words`.
void summarize(LatencyDecomposition &d);

struct ConversionChart {
    std::vector<double> delta_grid;    // normalized delay values, ascending
    std::vector<double> u_avg_shifted; // mean normalized word end shifted by each delta
    double u_avg = 0.0;
    double mean_duration_s = 0.0; // converts normalized delays to seconds

    double delta_seconds(double delta_norm) const { return delta_norm * mean_duration_s; }
};

// Word end times divided by their utterance length (from `durations_s`).
std::vector<double> normalized_end_times(std::span<const WordAlignment> alignments,
                                         const std::map<std::string, double> &durations_s);

ConversionChart build_conversion_chart(std::span<const double> normalized_end_times,
                                       std::span<const double> delta_grid);
ConversionChart build_conversion_chart(std::span<const WordAlignment> alignments,
                                       const std::map<std::string, double> &durations_s,
                                       std::span<const double> delta_grid);

// Normalized grid covering [0, max_s] seconds in steps of step_s.
std::vector<double> default_delta_grid(double mean_duration_s, double max_s = 5.0, double step_s = 0.05);

struct ConfidenceLatency {
    double delta_norm = 0.0;
    double delta_s = 0.0;
    bool clamped = false;
};

// Inverse chart lookup with linear interpolation between grid points;
// clamps to the grid ends.
ConfidenceLatency confidence_latency(double c_avg_norm, const ConversionChart &chart);

double rtf(double total_compute_ms, double audio_duration_ms);

std::size_t word_edit_distance(std::span<const std::string> reference, std::span<const std::string> hypothesis,
                               bool normalize_case = false);
double wer(std::span<const std::string> reference, std::span<const std::string> hypothesis,
           bool normalize_case = false);

struct SessionMetrics {
    double d_avg_ms = 0.0;
    double c_avg_norm = 0.0;
    double confidence_latency_s = 0.0;
    double rtf = 0.0;
    double wer = 0.0;
    bool latency_clamped = false;
    std::size_t matched_words = 0;
    std::size_t unmatched_words = 0;
};

struct MetricsOptions {
    double grid_max_s = 5.0;
    double grid_step_s = 0.05;
    double max_unmatched_fraction = 0.05;
    bool normalize_case = true;
};

// Corpus-level metrics for decoded sessions. WER pools edits over all
// utterances; the chart is built from every reference alignment.
SessionMetrics compute_metrics(std::span<const LoggedSession> sessions, std::span<const WordAlignment> alignments,
                               const References &references, const MetricsOptions &options = {});

// key=value report with d_avg_ms, rtf, c_avg_norm, confidence_latency_s, wer.
std::string format_metrics_report(const SessionMetrics &metrics);

struct TradeoffPoint {
    double delta_threshold_ms = 0.0;
    double confidence_latency_s = 0.0;
    double wer = 0.0;
    double c_avg_norm = 0.0;
};

// Decodes the corpus once per threshold with the rest of `base` unchanged
// (normally DetectorMode::Combined) and reports latency against accuracy.
std::vector<TradeoffPoint> tradeoff_sweep(const Corpus &corpus, const Scorer &scorer, SessionConfig base,
                                          std::span<const double> delta_thresholds,
                                          const MetricsOptions &options = {}, std::size_t jobs = 1,
                                          TimeMode time_mode = TimeMode::Simulated);

// Decodes every utterance of the corpus.
std::vector<LoggedSession> decode_corpus(const Corpus &corpus, const Scorer &scorer, const SessionConfig &config,
                                         std::size_t jobs = 1, TimeMode time_mode = TimeMode::Simulated);

std::vector<WordAlignment> corpus_alignments(const Corpus &corpus);
References corpus_references(const Corpus &corpus);

} // namespace streamdec
