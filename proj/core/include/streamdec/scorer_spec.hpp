#pragma once

#include "streamdec/scoring.hpp"
#include "streamdec/synthetic_scorer.hpp"
#include "streamdec/vocabulary.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace streamdec {

struct ScorerSpec {
    enum class Kind { Synthetic, Ensemble };

    Kind kind = Kind::Synthetic;
    SyntheticParams synthetic;          // Kind::Synthetic
    std::vector<ScorerSpec> members;    // Kind::Ensemble
    std::vector<double> weights;        // Kind::Ensemble, sums to 1
    int attention_member = 0;           // Kind::Ensemble, -1 = weighted mean

    void validate() const;
    bool operator==(const ScorerSpec &) const = default;
};

ScorerSpec uniform_ensemble(std::vector<ScorerSpec> members);

std::shared_ptr<const Scorer> build_scorer(const ScorerSpec &spec, const Vocabulary &vocab, std::size_t dim);

// A scorer configuration file: key=value per line, '#' comments, nested
// ensemble members under `member.N.` prefixes. Top-level `dim` and `vocab`
// (a path relative to the file) describe the model inputs.
struct ScorerConfig {
    ScorerSpec spec;
    std::size_t dim = 0;
    std::string vocab_path;

    static ScorerConfig parse(std::string_view text);
    static ScorerConfig load(const std::filesystem::path &path);
    std::string serialize() const;

    bool operator==(const ScorerConfig &) const = default;
};

// Loads the config plus the vocabulary it references and builds the scorer.
struct LoadedScorer {
    ScorerConfig config;
    Vocabulary vocab;
    std::shared_ptr<const Scorer> scorer;
};
LoadedScorer load_scorer(const std::filesystem::path &config_path);

} // namespace streamdec
