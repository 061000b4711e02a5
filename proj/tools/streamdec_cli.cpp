#include "streamdec/corpus.hpp"
#include "streamdec/error.hpp"
#include "streamdec/metrics.hpp"
#include "streamdec/pipeline.hpp"
#include "streamdec/scorer_spec.hpp"
#include "streamdec/synthesis.hpp"
#include "streamdec/text_format.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace streamdec;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct DecodeArgs {
    std::vector<std::string> features;
    std::string corpus;
    std::string scorer_spec;
    std::string detector = "shared";
    std::size_t beam = 8;
    double chunk_ms = 300.0;
    double delta_threshold_ms = std::numeric_limits<double>::infinity();
    double attention_mass = 0.95;
    std::size_t max_tokens = 256;
    bool length_norm = false;
    bool wall_time = false;
    std::size_t jobs = 1;
    std::string out_dir = ".";
    double noise = 0.0;
    std::uint64_t noise_seed = 0;
};

struct MetricsArgs {
    std::string log;
    std::string alignments;
    std::string references;
    double grid_max_s = 5.0;
    double grid_step_s = 0.05;
    double max_unmatched = 0.05;
};

struct SweepArgs {
    DecodeArgs decode;
    std::string thresholds;
};

struct GenArgs {
    CorpusOptions options;
    std::string out_dir;
};

struct ChartArgs {
    std::string corpus;
    double grid_max_s = 5.0;
    double grid_step_s = 0.05;
};

void add_session_flags(CLI::App &cmd, DecodeArgs &a) {
    cmd.add_option("--scorer-spec", a.scorer_spec, "Scorer config file (defaults to the corpus scorer)");
    cmd.add_option("--detector", a.detector, "Stability detector")
        ->check(CLI::IsMember({"shared", "endpoint", "combined"}));
    cmd.add_option("--beam", a.beam, "Beam size")->check(CLI::PositiveNumber);
    cmd.add_option("--chunk-ms", a.chunk_ms, "Audio chunk length in ms")->check(CLI::PositiveNumber);
    cmd.add_option("--delta-threshold-ms", a.delta_threshold_ms, "Reliable-endpoint threshold in ms")
        ->check(CLI::NonNegativeNumber);
    cmd.add_option("--attention-mass", a.attention_mass, "Cumulative attention mass defining the endpoint")
        ->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--max-tokens", a.max_tokens, "Output length cap")->check(CLI::PositiveNumber);
    cmd.add_flag("--length-norm", a.length_norm, "Rank hypotheses by per-token score");
    auto *sim = cmd.add_flag("--simulated-time", "Deterministic compute clock (default)");
    auto *wall = cmd.add_flag("--wall-time", a.wall_time, "Measure compute with the steady clock");
    sim->excludes(wall);
    wall->excludes(sim);
    cmd.add_option("--jobs", a.jobs, "Utterances decoded in parallel")->check(CLI::PositiveNumber);
    cmd.add_option("--noise", a.noise, "Corrupt the scorer with this noise level")->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--seed", a.noise_seed, "Seed for --noise");
}

SessionConfig session_config(const DecodeArgs &a) {
    SessionConfig c;
    c.chunk_ms = a.chunk_ms;
    c.beam_size = a.beam;
    c.detector_mode = parse_detector_mode(a.detector);
    c.delta_threshold_ms = a.delta_threshold_ms;
    c.attention_mass_threshold = a.attention_mass;
    c.max_output_tokens = a.max_tokens;
    c.length_normalized = a.length_norm;
    c.validate();
    return c;
}

// Scorer plus the utterances to decode, from either a corpus or loose files.
struct DecodeInputs {
    Corpus corpus;
    std::shared_ptr<const Scorer> scorer;
};

DecodeInputs load_inputs(const DecodeArgs &a) {
    std::optional<Corpus> corpus;
    if (!a.corpus.empty()) corpus = load_corpus(a.corpus);
    if (!corpus && a.scorer_spec.empty()) throw Error("--scorer-spec is required with --features");

    std::optional<LoadedScorer> loaded;
    if (!a.scorer_spec.empty()) loaded = load_scorer(a.scorer_spec);
    std::vector<Utterance> utterances;
    if (corpus) {
        utterances = std::move(corpus->utterances);
    } else {
        for (const auto &path : a.features)
            utterances.push_back({fs::path(path).stem().string(), FeatureStream::load(path), {}, {}, {}});
    }
    DecodeInputs in{loaded ? Corpus{loaded->vocab, loaded->config, std::move(utterances)}
                           : Corpus{corpus->vocab, corpus->scorer, std::move(utterances)},
                    nullptr};
    ScorerSpec spec = in.corpus.scorer.spec;
    if (a.noise > 0.0) spec = corrupt_scorer(spec, a.noise, a.noise_seed);
    in.scorer = build_scorer(spec, in.corpus.vocab, in.corpus.scorer.dim);
    return in;
}

TimeMode time_mode(const DecodeArgs &a) { return a.wall_time ? TimeMode::Wall : TimeMode::Simulated; }

int cmd_decode(const DecodeArgs &a) {
    const auto config = session_config(a);
    const auto in = load_inputs(a);
    const auto sessions = decode_corpus(in.corpus, *in.scorer, config, a.jobs, time_mode(a));

    std::string log;
    std::string transcripts;
    std::ostringstream summary;
    double compute = 0.0;
    double audio = 0.0;
    for (const auto &s : sessions) {
        log += serialize_commit_log(s.utt, s.result);
        transcripts += s.utt;
        for (const auto &w : s.result.final_words) transcripts += ' ' + w;
        transcripts += '\n';
        const double c = s.result.total_compute_ms();
        compute += c;
        audio += s.result.audio_duration_ms;
        summary << "session utt=" << s.utt << " audio_duration_ms=" << format_double(s.result.audio_duration_ms)
                << " compute_ms=" << format_double(c) << " steps=" << s.result.step_compute_ms.size()
                << " commits=" << s.result.commits.size() << " rtf=" << format_double(rtf(c, s.result.audio_duration_ms))
                << '\n';
    }
    summary << "utterances=" << sessions.size() << '\n'
            << "audio_duration_ms=" << format_double(audio) << '\n'
            << "compute_ms=" << format_double(compute) << '\n'
            << "rtf=" << format_double(audio > 0.0 ? rtf(compute, audio) : 0.0) << '\n';

    const fs::path out(a.out_dir);
    fs::create_directories(out);
    write_file_atomic(out / "commits.log", log);
    write_file_atomic(out / "transcripts.txt", transcripts);
    write_file_atomic(out / "summary.txt", summary.str());
    std::cout << summary.str();
    return 0;
}

int cmd_metrics(const MetricsArgs &a) {
    const auto sessions = replay_log(a.log);
    const auto alignments = load_alignments(a.alignments);
    const auto references = load_references(a.references);
    MetricsOptions opts;
    opts.grid_max_s = a.grid_max_s;
    opts.grid_step_s = a.grid_step_s;
    opts.max_unmatched_fraction = a.max_unmatched;
    std::cout << format_metrics_report(compute_metrics(sessions, alignments, references, opts));
    return 0;
}

std::vector<double> parse_thresholds(const std::string &text) {
    std::vector<double> out;
    for (const auto &field : split(text, ',')) {
        const auto t = trim(field);
        if (t.empty()) continue;
        double v = 0.0;
        try {
            v = parse_double(t);
        } catch (const Error &) {
            throw CLI::ValidationError("--thresholds", "not a number: " + std::string(t));
        }
        if (!(v >= 0.0)) throw CLI::ValidationError("--thresholds", "thresholds must be non-negative");
        out.push_back(v);
    }
    if (out.empty()) throw CLI::ValidationError("--thresholds", "threshold list is empty");
    return out;
}

int cmd_sweep(const SweepArgs &a, const std::vector<double> &thresholds) {
    if (a.decode.corpus.empty()) throw Error("--corpus is required");
    const auto config = session_config(a.decode);
    const auto in = load_inputs(a.decode);
    const auto points = tradeoff_sweep(in.corpus, *in.scorer, config, thresholds, {}, a.decode.jobs, time_mode(a.decode));
    std::cout << "threshold_ms\tlatency_s\twer\n";
    for (const auto &p : points)
        std::cout << format_double(p.delta_threshold_ms) << '\t' << format_double(p.confidence_latency_s) << '\t'
                  << format_double(p.wer) << '\n';
    return 0;
}

int cmd_gen(const GenArgs &a) {
    const Corpus corpus = generate_corpus(a.options);
    std::cout << save_corpus(corpus, a.out_dir).string() << '\n';
    return 0;
}

int cmd_chart(const ChartArgs &a) {
    const Corpus corpus = load_corpus(a.corpus);
    std::map<std::string, double> durations;
    double total = 0.0;
    for (const auto &u : corpus.utterances) {
        const double d = u.stream.duration_ms() / 1000.0;
        durations[u.id] = d;
        total += d;
    }
    if (corpus.utterances.empty()) throw Error("corpus has no utterances");
    const double mean = total / static_cast<double>(corpus.utterances.size());
    const auto grid = default_delta_grid(mean, a.grid_max_s, a.grid_step_s);
    const auto alignments = corpus_alignments(corpus);
    const auto chart = build_conversion_chart(alignments, durations, grid);
    std::cout << "delta_s\tdelta_norm\tu_avg_shifted\n";
    for (std::size_t i = 0; i < chart.delta_grid.size(); ++i)
        std::cout << format_double(chart.delta_seconds(chart.delta_grid[i])) << '\t'
                  << format_double(chart.delta_grid[i]) << '\t' << format_double(chart.u_avg_shifted[i]) << '\n';
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Streaming beam-search decoder with stable-prefix commits"};
    app.require_subcommand(1);

    DecodeArgs decode;
    auto *decode_cmd = app.add_subcommand("decode", "Decode feature files and write commit logs");
    auto *feats = decode_cmd->add_option("--features", decode.features, "Feature files")->check(CLI::ExistingFile);
    auto *corpus = decode_cmd->add_option("--corpus", decode.corpus, "Corpus directory")->check(CLI::ExistingDirectory);
    feats->excludes(corpus);
    decode_cmd->add_option("--out-dir", decode.out_dir, "Output directory");
    add_session_flags(*decode_cmd, decode);

    MetricsArgs metrics;
    auto *metrics_cmd = app.add_subcommand("metrics", "Latency and accuracy metrics of a commit log");
    metrics_cmd->add_option("--log", metrics.log, "Commit log")->required()->check(CLI::ExistingFile);
    metrics_cmd->add_option("--alignments", metrics.alignments, "Word alignments")->required()->check(CLI::ExistingFile);
    metrics_cmd->add_option("--references", metrics.references, "Reference transcripts")
        ->required()
        ->check(CLI::ExistingFile);
    metrics_cmd->add_option("--grid-max-s", metrics.grid_max_s, "Largest chart delay")->check(CLI::PositiveNumber);
    metrics_cmd->add_option("--grid-step-s", metrics.grid_step_s, "Chart delay step")->check(CLI::PositiveNumber);
    metrics_cmd->add_option("--max-unmatched", metrics.max_unmatched, "Tolerated unmatched word fraction")
        ->check(CLI::Range(0.0, 1.0));

    SweepArgs sweep;
    sweep.decode.detector = "combined";
    auto *sweep_cmd = app.add_subcommand("sweep", "Latency/accuracy trade-off over delta thresholds");
    sweep_cmd->add_option("--corpus", sweep.decode.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    sweep_cmd->add_option("--thresholds", sweep.thresholds, "Comma-separated thresholds in ms (inf allowed)")
        ->required();
    add_session_flags(*sweep_cmd, sweep.decode);

    GenArgs gen;
    auto *gen_cmd = app.add_subcommand("gen", "Generate a synthetic corpus");
    gen_cmd->add_option("--seed", gen.options.seed, "Generation seed");
    gen_cmd->add_option("--utts", gen.options.n_utterances, "Number of utterances")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--out-dir", gen.out_dir, "Output directory")->required();
    gen_cmd->add_option("--vocab-size", gen.options.vocab_size, "Token inventory size incl. eos")
        ->check(CLI::Range(3, 141));
    gen_cmd->add_option("--dim", gen.options.dim, "Feature dimension")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--min-words", gen.options.min_words, "Fewest words per utterance")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--max-words", gen.options.max_words, "Most words per utterance")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--feature-noise", gen.options.feature_noise, "Feature noise half-width")
        ->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--noise", gen.options.scorer_noise, "Scorer corruption level")->check(CLI::Range(0.0, 1.0));
    gen_cmd->add_option("--ensemble", gen.options.ensemble_size, "Scorer ensemble size")->check(CLI::PositiveNumber);

    ChartArgs chart;
    auto *chart_cmd = app.add_subcommand("chart", "Print the conversion chart of a corpus");
    chart_cmd->add_option("--corpus", chart.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    chart_cmd->add_option("--grid-max-s", chart.grid_max_s, "Largest delay")->check(CLI::PositiveNumber);
    chart_cmd->add_option("--grid-step-s", chart.grid_step_s, "Delay step")->check(CLI::PositiveNumber);

    std::vector<double> thresholds;
    try {
        app.parse(argc, argv);
        if (decode_cmd->parsed() && decode.features.empty() && decode.corpus.empty())
            throw CLI::RequiredError("--features or --corpus");
        if (gen_cmd->parsed() && gen.options.min_words > gen.options.max_words)
            throw CLI::ValidationError("--min-words", "exceeds --max-words");
        if (sweep_cmd->parsed()) thresholds = parse_thresholds(sweep.thresholds);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const CLI::App *sub = &app;
        for (auto *s : app.get_subcommands()) sub = s;
        std::cerr << sub->help();
        return kExitUsage;
    }

    try {
        if (decode_cmd->parsed()) return cmd_decode(decode);
        if (metrics_cmd->parsed()) return cmd_metrics(metrics);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep, thresholds);
        if (gen_cmd->parsed()) return cmd_gen(gen);
        if (chart_cmd->parsed()) return cmd_chart(chart);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
