#pragma once

#include "streamdec/types.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace streamdec {

// SentencePiece-style word marker (U+2581).
inline constexpr std::string_view kWordMarker = "\xE2\x96\x81";
inline constexpr std::string_view kEosToken = "</s>";

// Dense token inventory. Tokens starting with the word marker open a new word.
class Vocabulary {
public:
    Vocabulary(std::vector<std::string> tokens, TokenId eos_id,
               std::string word_boundary_marker = std::string(kWordMarker));

    std::size_t size() const noexcept { return tokens_.size(); }
    TokenId eos_id() const noexcept { return eos_id_; }
    const std::string &word_boundary_marker() const noexcept { return marker_; }
    const std::string &token(TokenId id) const;
    const std::vector<std::string> &tokens() const noexcept { return tokens_; }
    bool is_word_start(TokenId id) const;
    // -1 when absent.
    TokenId find(std::string_view token) const;

    // One token per line; the eos token must be "</s>".
    static Vocabulary load(const std::filesystem::path &path);
    std::string serialize() const;

    bool operator==(const Vocabulary &other) const {
        return tokens_ == other.tokens_ && eos_id_ == other.eos_id_ && marker_ == other.marker_;
    }

private:
    std::vector<std::string> tokens_;
    TokenId eos_id_;
    std::string marker_;
    std::unordered_map<std::string, TokenId> index_;
};

// Merges sub-word tokens into words at marker positions; eos is dropped.
// A leading continuation token (no marker) opens a word of its own.
std::vector<std::string> tokens_to_words(const Vocabulary &vocab, std::span<const TokenId> tokens);

struct WordSpan {
    std::string word;
    std::size_t first_token = 0;
    std::size_t last_token = 0; // inclusive index into the token sequence
};

// Word segmentation with token positions; tokens_to_words(v, t) lists the
// same words in the same order.
std::vector<WordSpan> word_spans(const Vocabulary &vocab, std::span<const TokenId> tokens);

// Deterministic toy inventory: id 0 is eos, then alternating word-initial
// and continuation consonant-vowel syllables. Every word string has a unique
// segmentation. Size must be in [3, 141].
Vocabulary make_synthetic_vocabulary(std::size_t size);

} // namespace streamdec
