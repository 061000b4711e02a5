#pragma once

#include "streamdec/features.hpp"
#include "streamdec/scorer_spec.hpp"
#include "streamdec/types.hpp"
#include "streamdec/vocabulary.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace streamdec {

// Time span of one reference word (CTM-like: `utt word start_s end_s`).
struct WordAlignment {
    std::string utt;
    std::string word;
    double start_s = 0.0;
    double end_s = 0.0;

    bool operator==(const WordAlignment &) const = default;
};

std::vector<WordAlignment> parse_alignments(std::string_view text);
std::vector<WordAlignment> load_alignments(const std::filesystem::path &path);
std::string serialize_alignments(std::span<const WordAlignment> alignments);

// Reference transcripts, one `utt word word ...` line per utterance.
using References = std::map<std::string, std::vector<std::string>>;
References parse_references(std::string_view text);
References load_references(const std::filesystem::path &path);
std::string serialize_references(const References &refs);

struct Utterance {
    std::string id;
    FeatureStream stream;
    std::vector<std::string> reference;
    std::vector<WordAlignment> alignment;
    TokenSeq planted; // ground-truth tokens, eos excluded

    bool operator==(const Utterance &) const = default;
};

struct Corpus {
    Vocabulary vocab;
    ScorerConfig scorer;
    std::vector<Utterance> utterances;

    bool operator==(const Corpus &) const = default;
};

// On-disk layout under `dir`:
//   vocab.txt, scorer.cfg, references.txt, alignments.txt,
//   feats/<utt>.txt, manifest.txt (`<sha256>  <relative path>` per file).
// Every file is written atomically; returns the manifest path.
std::filesystem::path save_corpus(const Corpus &corpus, const std::filesystem::path &dir);
Corpus load_corpus(const std::filesystem::path &dir);

std::string sha256_hex(std::string_view data);

} // namespace streamdec
